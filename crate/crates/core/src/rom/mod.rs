//! Non-intrusive reduced-order models: POD of snapshot matrices and
//! regression of the reduced coefficients over the parameter space.

mod approx;
mod cv;
mod io;
mod model;
mod pod;

pub use approx::{Approximant, Method};
pub use cv::{consecutive_folds, cv_report_csv, cv_with_folds, kfold_cv, relative_l2, CvResult};
pub use io::{load_rom, rom_from_bytes, rom_to_bytes, save_rom};
pub use model::{FieldRom, RomConfig, RomModel, RomPrediction};
pub use pod::{compute_pod, project, select_rank, PodBasis, Truncation};
