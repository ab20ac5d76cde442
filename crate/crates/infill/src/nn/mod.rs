//! A small reverse-mode autodiff over 2-D f32 arrays, enough to train the
//! toy denoiser on a CPU.

mod adam;
mod tape;

pub use adam::{clip_global_norm, Adam, AdamConfig};
pub use tape::{Tape, Var};
