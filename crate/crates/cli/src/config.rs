//! The experiment configuration: one JSON document.

use std::path::{Path, PathBuf};

use serde::Deserialize;
use szego_core::geometry::DomainSpec;
use szego_core::pipeline::{Experiment, Route};
use szego_core::quantize::SpectralFunction;
use szego_core::symbolics::SymbolSpec;
use szego_core::szego::Measurement;
use szego_core::timefreq::{wigner, PhaseWeight, WeightGrid, Window};

use crate::CliError;

/// The phase-space weight, either from a window pair or given directly.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum WeightSpec {
    /// `W = W_{φ₂,φ₁}`.
    Windows { phi2: Window, phi1: Window },
    /// `W(z) = (πs²)^{-1} e^{-|z|²/s²}`.
    Gaussian { scale: f64 },
}

impl Default for WeightSpec {
    fn default() -> Self {
        WeightSpec::Windows {
            phi2: Window::Gaussian,
            phi1: Window::Gaussian,
        }
    }
}

impl WeightSpec {
    pub fn build(&self) -> szego_core::Result<PhaseWeight> {
        match self {
            WeightSpec::Windows { phi2, phi1 } => wigner(phi2, phi1, WeightGrid::for_windows(phi2, phi1)),
            WeightSpec::Gaussian { scale } => PhaseWeight::gaussian(*scale),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ModeSpec {
    /// Eigenvalue count at a threshold in `(0, 1)`.
    Counting { delta: f64 },
    /// `tr f(T_r)` for `f(t) = Σ coeffs[k] t^k`.
    Trace { coeffs: Vec<f64> },
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    pub dir: Option<PathBuf>,
    /// File name prefix, `szego` if unset.
    pub prefix: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub domain: DomainSpec,
    #[serde(default)]
    pub weight: WeightSpec,
    #[serde(default)]
    pub symbol: SymbolSpec,
    pub mode: ModeSpec,
    pub r_list: Vec<f64>,
    #[serde(default)]
    pub grid_points: Option<usize>,
    #[serde(default)]
    pub basis: Option<usize>,
    #[serde(default)]
    pub route: Route,
    #[serde(default)]
    pub output: OutputSpec,
    #[serde(default)]
    pub seed: u64,
}

fn invalid(field: &str, msg: impl std::fmt::Display) -> CliError {
    CliError::Validation(format!("config field `{field}`: {msg}"))
}

impl ExperimentConfig {
    /// Parses and validates; errors name the offending field and, for syntax
    /// and type errors, the line and column.
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let cfg: Self = serde_path_to_error::deserialize(de).map_err(|e| {
            let inner = e.inner();
            CliError::Validation(format!(
                "config field `{}` (line {}, column {}): {inner}",
                e.path(),
                inner.line(),
                inner.column()
            ))
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Validation(format!("cannot read config {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        if self.r_list.is_empty() {
            return Err(invalid("r_list", "must not be empty"));
        }
        if let Some(i) = self.r_list.iter().position(|r| !(r.is_finite() && *r > 0.0)) {
            return Err(invalid(&format!("r_list[{i}]"), format!("must be positive, got {}", self.r_list[i])));
        }
        if let Some(i) = self.r_list.windows(2).position(|p| p[1] <= p[0]) {
            return Err(invalid(&format!("r_list[{}]", i + 1), "r values must be strictly increasing"));
        }
        match &self.mode {
            ModeSpec::Counting { delta } => {
                if !(*delta > 0.0 && *delta < 1.0) {
                    return Err(invalid("mode.delta", format!("threshold must lie in (0, 1), got {delta}")));
                }
                match self.symbol.as_constant() {
                    Some(c) if c > 0.0 => {}
                    _ => return Err(invalid("symbol", "counting mode needs a constant positive symbol")),
                }
            }
            ModeSpec::Trace { coeffs } => {
                if coeffs.is_empty() {
                    return Err(invalid("mode.coeffs", "need at least one coefficient"));
                }
                if coeffs[0] != 0.0 {
                    return Err(invalid(
                        "mode.coeffs[0]",
                        format!("spectral-function condition violated: f(0) = {} but f(0) = 0 is required", coeffs[0]),
                    ));
                }
                if let Some(i) = coeffs.iter().position(|c| !c.is_finite()) {
                    return Err(invalid(&format!("mode.coeffs[{i}]"), "must be finite"));
                }
            }
        }
        self.symbol.validate().map_err(|e| invalid("symbol", e))?;
        if let Some(n) = self.grid_points {
            if n < 64 || !n.is_power_of_two() {
                return Err(invalid("grid_points", format!("must be a power of two >= 64, got {n}")));
            }
        }
        if self.basis == Some(0) {
            return Err(invalid("basis", "must be positive"));
        }
        if let WeightSpec::Gaussian { scale } = self.weight {
            if !(scale > 0.0) {
                return Err(invalid("weight.scale", format!("must be positive, got {scale}")));
            }
        }
        if let Some(prefix) = &self.output.prefix {
            if prefix.is_empty() || prefix.contains(['/', '\\']) {
                return Err(invalid("output.prefix", "must be a non-empty file name"));
            }
        }
        Ok(())
    }

    pub fn measurement(&self) -> Measurement {
        match &self.mode {
            ModeSpec::Counting { delta } => Measurement::Count { delta: *delta },
            ModeSpec::Trace { coeffs } => Measurement::Trace(SpectralFunction::Polynomial { coeffs: coeffs.clone() }),
        }
    }

    pub fn prefix(&self) -> &str {
        self.output.prefix.as_deref().unwrap_or("szego")
    }

    /// Builds the domain and the weight; failures here are numerical.
    pub fn experiment(&self) -> Result<Experiment, CliError> {
        let domain = self.domain.build().map_err(|e| invalid("domain", e))?;
        let weight = self.weight.build().map_err(CliError::Numerical)?;
        Ok(Experiment {
            domain,
            weight,
            symbol: self.symbol.clone(),
            measurement: self.measurement(),
            grid_points: self.grid_points,
            basis: self.basis,
            route: self.route,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const DISC: &str = r#"{
        "domain": {"kind": "disc", "radius": 1.0},
        "mode": {"kind": "counting", "delta": 0.5},
        "r_list": [4, 6, 8]
    }"#;

    #[test]
    fn minimal_config_parses() {
        let cfg = ExperimentConfig::from_json(DISC).unwrap();
        assert_eq!(cfg.weight, WeightSpec::default());
        assert_eq!(cfg.prefix(), "szego");
        assert!(matches!(cfg.measurement(), Measurement::Count { delta } if delta == 0.5));
    }

    #[test]
    fn errors_name_the_field() {
        let bad = DISC.replace("\"delta\": 0.5", "\"delta\": \"half\"");
        let msg = ExperimentConfig::from_json(&bad).unwrap_err().to_string();
        assert!(msg.contains("mode") && msg.contains("line 3"), "{msg}");
        let bad = DISC.replace("[4, 6, 8]", "[4, 8, 6]");
        assert!(ExperimentConfig::from_json(&bad).unwrap_err().to_string().contains("r_list[2]"));
        let bad = DISC.replace("[4, 6, 8]", "[]");
        assert!(ExperimentConfig::from_json(&bad).unwrap_err().to_string().contains("r_list"));
        let bad = DISC.replace("\"r_list\"", "\"r_lst\"");
        assert!(ExperimentConfig::from_json(&bad).is_err());
    }

    #[test]
    fn nonzero_constant_term_is_rejected() {
        let bad = DISC.replace(r#"{"kind": "counting", "delta": 0.5}"#, r#"{"kind": "trace", "coeffs": [0.1, 0, 1]}"#);
        let err = ExperimentConfig::from_json(&bad).unwrap_err();
        assert!(matches!(err, CliError::Validation(_)));
        assert!(err.to_string().contains("spectral-function condition"));
    }

    #[test]
    fn counting_needs_constant_symbol() {
        let bad = DISC.replace(
            "\"r_list\"",
            r#""symbol": {"kind": "gaussian_bump", "amplitude": 1, "width": 1}, "r_list""#,
        );
        assert!(ExperimentConfig::from_json(&bad).unwrap_err().to_string().contains("symbol"));
    }
}
