//! Single-site influences, importance classification, Talagrand sums and the
//! random shift hash.

mod flip;
mod importance;
mod shift_hash;
mod talagrand;

pub use flip::{argmax_path_flips, cube_distance, flip_difference, flip_value, InfluenceRecord};
pub use importance::{classify_importance, diagnose_displacement, write_survey_csv, ImportanceSurvey, SurveyParams};
pub use shift_hash::{build_shift_hash, hash_order, shifted_value, ShiftBits, ShiftHash};
pub use talagrand::{talagrand_from_moments, talagrand_sum, talagrand_sum_weighted, talagrand_term, TalagrandSum, TalagrandTerm};
