//! Numerical primitives shared by every metric.

mod band;
pub mod filter;
mod normalize;
mod phase;
mod reference;
pub mod spectral;
mod window;

pub use band::BandSpec;
pub use filter::{bandpass, dc_blocker, dc_remove, Biquad, FilterBank, SosFilter};
pub use normalize::{NormalizeMethod, Normalizer};
pub use phase::{analytic_band, plv, plv_analytic, plv_windows};
pub use reference::{common_average_reference, common_average_reference_in_place};
pub use spectral::{band_log_power, msc, msc_windows, CoherenceConfig, POWER_FLOOR};
pub use window::{sliding_windows, SlidingWindower, Window};
