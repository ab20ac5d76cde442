use std::sync::Arc;

use meo_core::lang::random::random_valid_program;
use meo_core::synth::{MotionFamily, SynthParams};
use meo_infill::{
    blend_lambda, ContextWindow, DiffusionSchedule, Engine, EngineConfig, EngineVariant, SmoothingOracleDenoiser,
};
use meo_infill::spline::{root_curve, spline_infill};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_clip(seed: u64) -> meo_core::MotionClip {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let family = MotionFamily::ALL[rng.random_range(0..MotionFamily::ALL.len())];
    SynthParams::random(family, &mut rng).generate()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn engines_never_touch_conditioned_frames(seed in any::<u64>()) {
        let clip = random_clip(seed);
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
        let prog = random_valid_program(&mut rng, &clip, 3);
        let engine = Engine::new(Arc::new(SmoothingOracleDenoiser::new(2)), DiffusionSchedule::cosine(8));
        for variant in EngineVariant::ALL {
            let cfg = EngineConfig { variant, seed, ..Default::default() };
            let Ok(out) = engine.execute_program(&clip, &prog, &cfg) else { continue };
            for f in 0..clip.len() {
                if out.window.is_context(f) && !out.keyframes.iter().any(|k| k.frame_index == f) {
                    prop_assert!(out.clip.frames()[f].bitwise_eq(&out.base.frames()[f]), "{variant} frame {f}");
                }
            }
            for k in &out.keyframes {
                prop_assert!(out.clip.frames()[k.frame_index].bitwise_eq(&k.pose), "{variant} key {}", k.frame_index);
            }
        }
    }

    #[test]
    fn spline_passes_knots_and_matches_context_velocity(seed in any::<u64>()) {
        let clip = random_clip(seed);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let prog = random_valid_program(&mut rng, &clip, 2);
        let engine = Engine::default();
        let Ok(out) = engine.execute_program(&clip, &prog, &EngineConfig::default()) else { return Ok(()) };
        let Some(curve) = root_curve(&out.base, &out.keyframes, &out.window) else { return Ok(()) };
        for (t, p) in curve.knots.iter().zip(&curve.values) {
            prop_assert!((curve.eval(*t) - p).norm() <= 1e-12);
        }
        let src = out.base.frames();
        let h = 1e-4;
        let w = out.window;
        if w.start > 0 {
            let a = (w.start - 1) as f64;
            let d = (curve.eval(a) * -3.0 + curve.eval(a + h) * 4.0 - curve.eval(a + 2.0 * h)) / (2.0 * h);
            let v = src[w.start - 1].root_translation - src[w.start.saturating_sub(2)].root_translation;
            if w.start >= 2 {
                prop_assert!((d - v).norm() <= 1e-6, "left jump {}", (d - v).norm());
            }
        }
        if w.end > 0 {
            let bi = clip.len() - w.end;
            let b = bi as f64;
            let d = (curve.eval(b) * 3.0 - curve.eval(b - h) * 4.0 + curve.eval(b - 2.0 * h)) / (2.0 * h);
            if bi + 1 < clip.len() {
                let v = src[bi + 1].root_translation - src[bi].root_translation;
                prop_assert!((d - v).norm() <= 1e-6, "right jump {}", (d - v).norm());
            }
        }
        let again = spline_infill(&out.base, &out.keyframes, &out.window).unwrap();
        prop_assert!(again.bitwise_eq(&out.spline));
    }
}

#[test]
fn blend_lambda_is_exact_up_to_1000_steps() {
    for steps in 1..=1000usize {
        for t in 1..=steps {
            assert_eq!(blend_lambda(t, steps), (t - 1) as f64 / steps as f64);
        }
    }
}

#[test]
fn window_never_swallows_a_key() {
    for key in 0..60 {
        let w = ContextWindow::around_keys(60, 5, &[key]).unwrap();
        assert!(!w.is_context(key));
        assert!(w.check_keys(&[key]).is_ok());
    }
}
