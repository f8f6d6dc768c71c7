//! Truncated Fock-basis states: coherent and photon-added states, the
//! amplifier's two-mode output, density matrices and cutoff selection.

mod density;
mod params;
mod state;
pub(crate) use state::ln_pow;
mod truncation;
mod two_mode;

pub use density::DensityMatrix;
pub use params::{ParamsBuilder, SchemeParams, DEFAULT_HARD_CAP, DEFAULT_TAIL_TOL};
pub use state::{
    coherent_state, coherent_state_complex, photon_added_coherent, photon_added_with_norm,
    sized_photon_added_coherent, FockVector,
};
pub use truncation::{amplitude_truncation, choose_truncation, two_mode_truncation};
pub use two_mode::{opa_two_mode_state, opa_two_mode_state_rotated, TwoModeState};
