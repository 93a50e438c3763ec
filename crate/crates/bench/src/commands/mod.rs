mod convert;
mod eval_gen;
mod eval_recon;
mod preference;
mod stability;

pub use convert::{convert, reconstruct};
pub use eval_gen::eval_gen;
pub use eval_recon::eval_recon;
pub use preference::{bt_fit, decompose};
pub use stability::stability;

use serde_json::Value;

/// Warnings go to stderr as one JSON object per line.
pub(crate) fn warn(v: Value) {
    eprintln!("{v}");
}
