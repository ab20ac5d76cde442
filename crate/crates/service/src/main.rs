use std::io::{BufRead, Write};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};
use meo_core::eval::{frechet_feature_distance, g_mpjpe};
use meo_core::lang::{parse_meo, print_meo};
use meo_core::motion::{export_bvh, load_clip, save_clip};
use meo_core::synth::{MotionFamily, SynthParams};
use meo_core::MotionClip;
use meo_inducer::fixtures::{record_all, FixtureScript};
use meo_inducer::{AgentBackend, FixtureMap, HttpBackend, InducerConfig, ReplayBackend};
use meo_infill::checkpoint::{load_checkpoint, save_checkpoint};
use meo_infill::training::SanityRun;
use meo_infill::{Engine, EngineConfig, EngineVariant, GuidanceMode};
use meo_service::suite::run_suite;
use meo_service::{router, AppState, EventLog, SessionService, UnconfiguredBackend, Which};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[derive(Parser)]
#[command(name = "meo", version, about = "Iterative natural-language motion editing")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args, Clone)]
struct EngineArgs {
    /// interp, eng or eng-ss; defaults to eng with a checkpoint, interp otherwise.
    #[arg(long)]
    variant: Option<EngineVariant>,
    /// Trained denoiser checkpoint.
    #[arg(long)]
    checkpoint: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 5)]
    window: usize,
    /// auto, on or off.
    #[arg(long, default_value = "auto")]
    guidance: String,
}

#[derive(clap::Args, Clone)]
struct AgentArgs {
    /// Replay recorded agent replies instead of calling MEO_LLM_URL.
    #[arg(long)]
    llm_fixtures: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Run the HTTP service.
    Serve {
        #[arg(long, default_value_t = 8080)]
        port: u16,
        #[arg(long, default_value = "127.0.0.1")]
        host: String,
        #[arg(long, env = "MEO_DATA_DIR", default_value = "meo-data")]
        data_dir: PathBuf,
        /// Directory with the studio front end, served at `/`.
        #[arg(long)]
        static_dir: Option<PathBuf>,
        #[command(flatten)]
        engine: EngineArgs,
        #[command(flatten)]
        agent: AgentArgs,
    },
    /// Edit a clip interactively, one instruction per line.
    Repl {
        #[arg(long)]
        clip: PathBuf,
        /// Description of the source motion.
        #[arg(long, default_value = "")]
        ctx: String,
        #[arg(long, env = "MEO_DATA_DIR")]
        data_dir: Option<PathBuf>,
        #[command(flatten)]
        engine: EngineArgs,
        #[command(flatten)]
        agent: AgentArgs,
    },
    /// Apply one or more instructions in order and write the result.
    Edit {
        #[arg(long)]
        clip: PathBuf,
        #[arg(long, required = true)]
        instruction: Vec<String>,
        #[arg(long, default_value = "")]
        ctx: String,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, env = "MEO_DATA_DIR")]
        data_dir: Option<PathBuf>,
        #[command(flatten)]
        engine: EngineArgs,
        #[command(flatten)]
        agent: AgentArgs,
    },
    /// Execute a program given as MEO text, without the agent.
    Infill {
        #[arg(long)]
        clip: PathBuf,
        #[arg(long)]
        program: String,
        #[arg(long)]
        out: PathBuf,
        /// Also write the spline baseline here.
        #[arg(long)]
        spline_out: Option<PathBuf>,
        #[command(flatten)]
        engine: EngineArgs,
    },
    /// Train the toy denoiser on the synthetic corpus and save a checkpoint.
    Train {
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        steps: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
    },
    #[command(subcommand)]
    Eval(EvalCommand),
    /// Write a procedural clip.
    Synth {
        /// squat, kick, jump or arm_raise.
        #[arg(long)]
        family: String,
        /// Randomize the family parameters with this seed.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: PathBuf,
    },
    #[command(subcommand)]
    Fixtures(FixturesCommand),
    ExportBvh {
        #[arg(long)]
        clip: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Re-run every persisted edit of a session from its log and compare.
    Replay {
        #[arg(long, env = "MEO_DATA_DIR", default_value = "meo-data")]
        data_dir: PathBuf,
        /// Session id; all sessions when omitted.
        #[arg(long)]
        session: Option<String>,
        #[command(flatten)]
        engine: EngineArgs,
    },
}

#[derive(Subcommand)]
enum EvalCommand {
    /// Run the single-MEO fidelity suite.
    Fidelity {
        #[command(flatten)]
        engine: EngineArgs,
        #[arg(long)]
        json: bool,
    },
    /// Global mean per-joint position error between two clips.
    Mpjpe {
        a: PathBuf,
        b: PathBuf,
    },
    /// Frechet distance between the geometric features of two clip sets.
    Fid {
        #[arg(long, num_args = 2.., required = true)]
        a: Vec<PathBuf>,
        #[arg(long, num_args = 2.., required = true)]
        b: Vec<PathBuf>,
    },
}

#[derive(Subcommand)]
enum FixturesCommand {
    /// Record scripted agent conversations into a replay map.
    Record {
        /// Directory of script files.
        #[arg(long)]
        scripts: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

fn read_clip(path: &Path) -> Result<MotionClip> {
    let bytes = std::fs::read(path).with_context(|| path.display().to_string())?;
    load_clip(&bytes).with_context(|| format!("{}: not a valid clip", path.display()))
}

fn write(path: &Path, bytes: impl AsRef<[u8]>) -> Result<()> {
    std::fs::write(path, bytes).with_context(|| path.display().to_string())
}

fn build_engine(args: &EngineArgs) -> Result<(Engine, EngineConfig)> {
    let guidance = match args.guidance.as_str() {
        "auto" => GuidanceMode::Auto,
        "on" => GuidanceMode::On,
        "off" => GuidanceMode::Off,
        g => bail!("unknown guidance mode `{g}`"),
    };
    let (engine, default_variant) = match &args.checkpoint {
        Some(p) => {
            let ck = load_checkpoint(p).with_context(|| p.display().to_string())?;
            (Engine::new(Arc::new(ck.denoiser), ck.schedule), EngineVariant::Eng)
        }
        None => (Engine::default(), EngineVariant::Interp),
    };
    let cfg = EngineConfig {
        variant: args.variant.unwrap_or(default_variant),
        window: args.window,
        seed: args.seed,
        guidance,
        ..Default::default()
    };
    Ok((engine, cfg))
}

fn build_backend(args: &AgentArgs) -> Result<Arc<dyn AgentBackend>> {
    if let Some(p) = &args.llm_fixtures {
        return Ok(Arc::new(ReplayBackend::load(p)?));
    }
    Ok(match HttpBackend::from_env() {
        Ok(b) => Arc::new(b),
        Err(e) => Arc::new(UnconfiguredBackend(e.to_string())),
    })
}

fn scratch_dir(data_dir: Option<PathBuf>) -> PathBuf {
    data_dir.unwrap_or_else(|| std::env::temp_dir().join(format!("meo-{}", std::process::id())))
}

fn service(data_dir: &Path, engine: &EngineArgs, agent: &AgentArgs) -> Result<SessionService> {
    let (e, cfg) = build_engine(engine)?;
    let mut svc = SessionService::new(EventLog::open(data_dir)?, build_backend(agent)?, e);
    svc.default_engine = cfg;
    svc.inducer = InducerConfig::default();
    Ok(svc)
}

fn parse_family(s: &str) -> Result<MotionFamily> {
    serde_json::from_value(serde_json::Value::String(s.into())).with_context(|| format!("unknown family `{s}`"))
}

fn main() -> Result<()> {
    match Cli::parse().command {
        Command::Serve { port, host, data_dir, static_dir, engine, agent } => {
            tracing_subscriber::fmt().init();
            let svc = Arc::new(service(&data_dir, &engine, &agent)?);
            let app = router(AppState { service: svc, static_dir });
            let rt = tokio::runtime::Runtime::new()?;
            rt.block_on(async move {
                let listener = tokio::net::TcpListener::bind((host.as_str(), port)).await?;
                tracing::info!("listening on http://{}", listener.local_addr()?);
                axum::serve(listener, app).await?;
                Ok::<_, anyhow::Error>(())
            })?;
        }
        Command::Repl { clip, ctx, data_dir, engine, agent } => {
            let svc = service(&scratch_dir(data_dir), &engine, &agent)?;
            let s = svc.create_session(meo_core::motion::clip_to_json(&read_clip(&clip)?), ctx, None)?;
            println!("session {}; commands: :undo, :history, :save <path>, :quit", s.id);
            let stdin = std::io::stdin();
            let mut out = std::io::stdout();
            loop {
                write!(out, "> ")?;
                out.flush()?;
                let mut line = String::new();
                if stdin.lock().read_line(&mut line)? == 0 {
                    break;
                }
                let line = line.trim();
                match line.split_once(' ').unwrap_or((line, "")) {
                    ("", _) => {}
                    (":quit", _) => break,
                    (":undo", _) => match svc.undo(&s.id) {
                        Ok(sum) => println!("undone; {} edit(s) remain", sum.history_len),
                        Err(e) => println!("error: {e}"),
                    },
                    (":history", _) => {
                        for (i, h) in svc.history(&s.id)?.iter().enumerate() {
                            println!("{}. {}\n   {}", i + 1, h.instruction, h.program_text);
                        }
                    }
                    (":save", path) if !path.is_empty() => {
                        write(Path::new(path), save_clip(&svc.clip(&s.id, Which::Edited)?))?;
                        println!("saved {path}");
                    }
                    _ => match svc.submit_instruction(&s.id, line) {
                        Ok(r) => {
                            println!("{}", r.program_text);
                            for n in &r.node_trace {
                                println!("  {:?}: {}", n.node, n.justification);
                            }
                        }
                        Err(e) => println!("error: {e}"),
                    },
                }
            }
        }
        Command::Edit { clip, instruction, ctx, out, data_dir, engine, agent } => {
            let svc = service(&scratch_dir(data_dir), &engine, &agent)?;
            let s = svc.create_session(meo_core::motion::clip_to_json(&read_clip(&clip)?), ctx, None)?;
            for i in &instruction {
                let r = svc.submit_instruction(&s.id, i)?;
                println!("{}", r.program_text);
            }
            write(&out, save_clip(&svc.clip(&s.id, Which::Edited)?))?;
        }
        Command::Infill { clip, program, out, spline_out, engine } => {
            let (e, cfg) = build_engine(&engine)?;
            let program = parse_meo(&program)?;
            let res = e.execute_program(&read_clip(&clip)?, &program, &cfg)?;
            write(&out, save_clip(&res.clip))?;
            if let Some(p) = spline_out {
                write(&p, save_clip(&res.spline))?;
            }
            eprintln!("{}", print_meo(&program));
            println!("{}", serde_json::to_string_pretty(&res.report)?);
        }
        Command::Train { out, steps, seed } => {
            let mut run = SanityRun::default();
            if let Some(s) = steps {
                run.train.steps = s;
            }
            if let Some(s) = seed {
                run.train.seed = s;
            }
            let (outcome, model, _) = run.run(|step, loss| {
                if step % 200 == 0 {
                    eprintln!("step {step:>5}  loss {loss:.5}");
                }
            })?;
            let training = serde_json::json!({ "run": run, "outcome": outcome });
            save_checkpoint(&out, &model, &meo_infill::DiffusionSchedule::cosine(50), training.clone())?;
            println!("{}", serde_json::to_string_pretty(&training)?);
        }
        Command::Eval(EvalCommand::Fidelity { engine, json }) => {
            let (e, cfg) = build_engine(&engine)?;
            let r = run_suite(&e, &cfg);
            if json {
                println!("{}", serde_json::to_string_pretty(&r)?);
            } else {
                println!("{}: {}/{} passed ({:.3})", r.variant, r.passed, r.cases, r.pass_rate);
                for f in &r.failures {
                    println!("  fail {:?} {} {:?}", f.family, f.program, f.error);
                }
            }
        }
        Command::Eval(EvalCommand::Mpjpe { a, b }) => {
            println!("{:.6}", g_mpjpe(&read_clip(&a)?, &read_clip(&b)?)?);
        }
        Command::Eval(EvalCommand::Fid { a, b }) => {
            let load = |ps: &[PathBuf]| ps.iter().map(|p| read_clip(p)).collect::<Result<Vec<_>>>();
            let r = frechet_feature_distance(&load(&a)?, &load(&b)?)?;
            println!("{:.6}{}", r.distance, if r.ridge_applied { " (ridge applied)" } else { "" });
        }
        Command::Synth { family, seed, out } => {
            let family = parse_family(&family)?;
            let params = match seed {
                Some(s) => SynthParams::random(family, &mut ChaCha8Rng::seed_from_u64(s)),
                None => SynthParams::canonical(family),
            };
            write(&out, save_clip(&params.generate()))?;
        }
        Command::Fixtures(FixturesCommand::Record { scripts, out }) => {
            let mut paths: Vec<_> = std::fs::read_dir(&scripts)?.map(|e| e.map(|e| e.path())).collect::<Result<_, _>>()?;
            paths.retain(|p| p.extension().is_some_and(|e| e == "json"));
            paths.sort();
            let scripts = paths
                .iter()
                .map(|p| {
                    let text = std::fs::read_to_string(p)?;
                    serde_json::from_str::<FixtureScript>(&text).with_context(|| p.display().to_string())
                })
                .collect::<Result<Vec<_>>>()?;
            let map: FixtureMap = record_all(&scripts, &InducerConfig::default())?;
            write(&out, map.to_json_pretty())?;
            println!("{} exchanges from {} scripts", map.0.len(), scripts.len());
        }
        Command::ExportBvh { clip, out } => {
            write(&out, export_bvh(&read_clip(&clip)?))?;
        }
        Command::Replay { data_dir, session, engine } => {
            let agent = AgentArgs { llm_fixtures: None };
            let svc = service(&data_dir, &engine, &agent)?;
            let ids = match session {
                Some(s) => vec![s],
                None => svc.list()?,
            };
            let mut bad = 0;
            for id in ids {
                match svc.replay_check(&id) {
                    Ok(r) if r.identical => println!("ok    {id} ({} edits)", r.edits_replayed),
                    Ok(r) => {
                        bad += 1;
                        println!("DIFF  {id}: {} vs {}", r.current_sha256, r.replayed_sha256);
                    }
                    Err(e) => {
                        bad += 1;
                        println!("FAIL  {id}: {e}");
                    }
                }
            }
            if bad > 0 {
                bail!("{bad} session(s) did not replay");
            }
        }
    }
    Ok(())
}
