use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("point lies outside the tubular neighbourhood: |signed distance| = {distance} >= tau = {tau}")]
    NotInTube { distance: f64, tau: f64 },

    #[error("degenerate boundary: curvature bound {max_curvature} is not finite on the sample grid")]
    DegenerateBoundary { max_curvature: f64 },

    #[error("tube half-width {t} exceeds the tubular radius estimate {tau}")]
    TubeTooWide { t: f64, tau: f64 },

    #[error("grid too coarse: {0}")]
    GridTooCoarse(String),

    #[error("grid too small: relative magnitude {leak:e} at the grid edge")]
    GridTooSmall { leak: f64 },

    #[error("Hermite basis too small: tail coefficient magnitude {tail:e} exceeds 1e-10")]
    BasisTooSmall { tail: f64 },

    #[error("Hermite basis of size {basis} is not resolved by the grid ({detail})")]
    BasisOverflow { basis: usize, detail: String },

    #[error("Weyl kernel aliased: relative kernel magnitude {leak:e} at the lattice edge")]
    AliasedKernel { leak: f64 },

    #[error("profile is flat at the threshold near lambda = {lambda}")]
    FlatCrossing { lambda: f64 },

    #[error("profile is complex-valued (max |Im| = {max_imag:e}); a real profile is required")]
    ComplexProfile { max_imag: f64 },

    #[error("matrix is not Hermitian (max |M - M*| = {defect:e})")]
    NonHermitian { defect: f64 },

    #[error("ill-conditioned fit: {0}")]
    IllConditionedFit(String),

    #[error("spectral-function condition violated: f(0) = {value} but f(0) = 0 is required")]
    SpectralFunctionNonzeroAtOrigin { value: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("linear algebra failure: {0}")]
    Linalg(String),
}
