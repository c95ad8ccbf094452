//! Windows, Wigner transforms, the phase weight `W`, edge profiles `Q_ω`
//! computed two independent ways, and the counting profile `g_ω`.

pub mod frft;
pub mod profile;
pub mod wigner;
pub mod window;

pub use frft::{frft, DEFAULT_FRFT_BASIS};
pub use profile::{
    counting_profile_g, inverse_profile, profile_q_frft, profile_q_frft_with_basis, profile_q_halfplane, LambdaGrid,
    ProfileQ,
};
pub use wigner::{wigner, PhaseWeight, WeightGrid};
pub use window::{gaussian_window, hermite_window, Window};
