//! One r at a time: smoothed symbol, quantisation, measurement, with the
//! discretisation metadata that goes with every number.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Domain;
use crate::quantize::{count_eigenvalues, op_hermite_from_kernel, op_kernel_from_kernel, spectral_apply_horner, trace, weyl_kernel, OperatorMatrix, SpectralFunction};
use crate::symbolics::{smoothed_symbol, GridSpec, SymbolGrid, SymbolSpec};
use crate::szego::{coefficients, A1Options, Coefficients, Measurement};
use crate::timefreq::PhaseWeight;

/// Which matrix represents the operator.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Route {
    #[default]
    Hermite,
    Kernel,
}

#[derive(Debug, Clone)]
pub struct Experiment {
    pub domain: Domain,
    pub weight: PhaseWeight,
    pub symbol: SymbolSpec,
    pub measurement: Measurement,
    /// Points per axis of the critical symbol grid; chosen from `r` if unset.
    pub grid_points: Option<usize>,
    /// Hermite basis size; chosen from `r` if unset.
    pub basis: Option<usize>,
    pub route: Route,
}

/// A measured value with its error budget.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Row {
    pub r: f64,
    pub measured: f64,
    pub identity_defect: f64,
    pub edge_leakage: f64,
    pub basis_tail: f64,
    /// Eigenvalues within `1e-9` of a counting threshold.
    pub near_threshold: usize,
    pub grid_points: usize,
    pub dimension: usize,
}

#[derive(Debug, Clone)]
pub struct Spectrum {
    pub row: Row,
    /// Ascending.
    pub eigenvalues: Vec<f64>,
}

/// `⌈1.2·⌈(rR + 6)²/2⌉⌉`: the Hermite functions needed to cover a disc of
/// radius `rR` plus a margin, with 20% to spare.
pub fn default_basis(r: f64, bounding_radius: f64) -> usize {
    let cover = ((r * bounding_radius + 6.0).powi(2) / 2.0).ceil();
    (cover * 1.2).ceil() as usize
}

impl Experiment {
    pub fn basis_for(&self, r: f64) -> usize {
        self.basis.unwrap_or_else(|| default_basis(r, self.domain.bounding_radius()))
    }

    pub fn grid_for(&self, r: f64) -> Result<GridSpec> {
        match self.grid_points {
            Some(n) => GridSpec::critical(n),
            None => GridSpec::for_dilation(r, self.domain.bounding_radius(), self.basis_for(r)),
        }
    }

    pub fn symbol_at(&self, r: f64) -> Result<SymbolGrid> {
        let a = &self.symbol;
        smoothed_symbol(&self.weight, |z| a.eval(z), &self.domain, r, self.grid_for(r)?)
    }

    pub fn operator_at(&self, r: f64) -> Result<(SymbolGrid, OperatorMatrix)> {
        let q = self.symbol_at(r)?;
        let kernel = weyl_kernel(&q)?;
        let m = match self.route {
            Route::Hermite => op_hermite_from_kernel(&kernel, self.basis_for(r))?,
            Route::Kernel => op_kernel_from_kernel(&kernel),
        };
        Ok((q, m))
    }

    fn row(&self, r: f64, q: &SymbolGrid, m: &OperatorMatrix, measured: f64, near_threshold: usize) -> Row {
        Row {
            r,
            measured,
            identity_defect: m.identity_defect(),
            edge_leakage: q.edge_leak(),
            basis_tail: m.basis_tail(),
            near_threshold,
            grid_points: q.grid().n,
            dimension: m.dim(),
        }
    }

    /// Eigenvalues of the operator at dilation `r`.
    pub fn spectrum(&self, r: f64) -> Result<Spectrum> {
        let (q, m) = self.operator_at(r)?;
        let eigenvalues = m.eigenvalues()?;
        let (measured, near) = match &self.measurement {
            Measurement::Count { delta } => {
                let c = count_eigenvalues(&eigenvalues, *delta);
                (c.count as f64, c.near_threshold)
            }
            Measurement::Trace(f) => (eigenvalues.iter().map(|v| f.eval(*v)).sum(), 0),
        };
        Ok(Spectrum {
            row: self.row(r, &q, &m, measured, near),
            eigenvalues,
        })
    }

    /// The count `#{λ ≥ δ}` or the trace `tr f(T_r)`.
    pub fn measure(&self, r: f64) -> Result<Row> {
        let (q, m) = self.operator_at(r)?;
        match &self.measurement {
            Measurement::Count { delta } => {
                let c = count_eigenvalues(&m.eigenvalues()?, *delta);
                Ok(self.row(r, &q, &m, c.count as f64, c.near_threshold))
            }
            Measurement::Trace(f) => {
                let value = match m.require_hermitian() {
                    Ok(()) => m.eigenvalues()?.iter().map(|v| f.eval(*v)).sum(),
                    Err(e) => match f {
                        SpectralFunction::Polynomial { .. } => {
                            let t: Complex64 = trace(&spectral_apply_horner(&m, f)?);
                            if t.im.abs() > 1e-9 * t.re.abs().max(1.0) {
                                return Err(Error::ComplexProfile { max_imag: t.im.abs() });
                            }
                            t.re
                        }
                        SpectralFunction::Smooth { .. } => return Err(e),
                    },
                };
                Ok(self.row(r, &q, &m, value, 0))
            }
        }
    }

    /// Predicted `A₀`, `A₁`. Counting needs a constant positive symbol `c`,
    /// which is folded into the threshold as `δ/c`.
    pub fn coefficients(&self, opts: &A1Options) -> Result<Coefficients> {
        let a = &self.symbol;
        match &self.measurement {
            Measurement::Count { delta } => {
                let c = a.as_constant().filter(|c| *c > 0.0).ok_or_else(|| {
                    Error::InvalidArgument("counting asymptotics need a constant positive symbol".into())
                })?;
                let m = Measurement::Count { delta: delta / c };
                coefficients(|_| 1.0, &self.domain, &self.weight, &m, opts)
            }
            m => coefficients(|z| a.eval(z), &self.domain, &self.weight, m, opts),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::timefreq::{gaussian_window, wigner, WeightGrid};

    fn disc_experiment(measurement: Measurement) -> Experiment {
        let g = gaussian_window();
        Experiment {
            domain: Domain::unit_disc(),
            weight: wigner(&g, &g, WeightGrid::for_windows(&g, &g)).unwrap(),
            symbol: SymbolSpec::default(),
            measurement,
            grid_points: None,
            basis: None,
            route: Route::Hermite,
        }
    }

    #[test]
    fn default_sizes() {
        assert_eq!(default_basis(8.0, 1.0), 118);
        let e = disc_experiment(Measurement::Count { delta: 0.5 });
        assert_eq!(e.grid_for(4.0).unwrap().n, 512);
        assert_eq!(e.grid_for(8.0).unwrap().n, 1024);
        assert_eq!(e.grid_for(24.0).unwrap().n, 2048);
    }

    #[test]
    fn counting_row_carries_metadata() {
        let e = disc_experiment(Measurement::Count { delta: 0.5 });
        let row = e.measure(4.0).unwrap();
        assert_eq!(row.measured, 8.0);
        assert!(row.identity_defect < 1e-10);
        assert!(row.edge_leakage < 1e-10);
        assert!(row.basis_tail < 1e-8);
        let c = e.coefficients(&A1Options::default()).unwrap();
        assert!((c.a0 - 0.5).abs() < 1e-10 && c.a1.abs() < 1e-8);
    }

    #[test]
    fn trace_of_square_is_sum_of_squares() {
        let e = disc_experiment(Measurement::Trace(SpectralFunction::square()));
        let row = e.measure(4.0).unwrap();
        let spec = e.spectrum(4.0).unwrap();
        let want: f64 = spec.eigenvalues.iter().map(|v| v * v).sum();
        assert!((row.measured - want).abs() < 1e-10);
    }

    #[test]
    fn scaled_symbol_folds_into_threshold() {
        let mut e = disc_experiment(Measurement::Count { delta: 0.5 });
        e.symbol = SymbolSpec::Constant { value: 2.0 };
        let c = e.coefficients(&A1Options::default()).unwrap();
        assert!((c.a1 - 0.476936).abs() < 1e-6);
        e.symbol = SymbolSpec::GaussianBump {
            amplitude: 1.0,
            width: 1.0,
            center: [0.0, 0.0],
        };
        assert!(e.coefficients(&A1Options::default()).is_err());
    }
}
