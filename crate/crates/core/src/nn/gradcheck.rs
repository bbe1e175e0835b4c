//! Central-difference verification of analytic gradients.

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::params::ParamSet;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GradCheckOptions {
    pub step: f64,
    pub tolerance: f64,
    /// Coordinates sampled per parameter; `None` checks all of them.
    pub max_coords_per_param: Option<usize>,
    /// Relative errors divide by `max(|analytic|, |numeric|, abs_floor)`.
    pub abs_floor: f64,
    pub seed: u64,
    /// Restricts the check to parameters whose name starts with this prefix.
    pub name_prefix: Option<&'static str>,
}

impl Default for GradCheckOptions {
    fn default() -> Self {
        Self {
            step: 1e-5,
            tolerance: 1e-3,
            max_coords_per_param: Some(32),
            abs_floor: 1e-6,
            seed: 0,
            name_prefix: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CoordError {
    pub param: String,
    pub index: usize,
    pub analytic: f64,
    pub numeric: f64,
    pub rel_error: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GradCheckReport {
    pub max_rel_error: f64,
    pub coords_checked: usize,
    pub worst: Option<CoordError>,
    pub tolerance: f64,
}

impl GradCheckReport {
    pub fn passed(&self) -> bool {
        self.max_rel_error <= self.tolerance
    }
}

/// Compares the gradients written by `loss` against central differences.
///
/// `loss` must evaluate the objective at the current parameter values and
/// accumulate its analytic gradient into `Parameter::grad` (gradients are
/// zeroed before each call). It is called twice at the base point; differing
/// results raise [`Error::NonDeterministicClosure`].
pub fn finite_difference_check<F>(
    mut loss: F,
    params: &mut ParamSet,
    options: GradCheckOptions,
) -> Result<GradCheckReport>
where
    F: FnMut(&mut ParamSet) -> Result<f64>,
{
    params.zero_grad();
    let base = loss(params)?;
    let analytic: Vec<_> = params.iter().map(|p| p.grad.clone()).collect();
    params.zero_grad();
    let again = loss(params)?;
    if base.to_bits() != again.to_bits() {
        return Err(Error::NonDeterministicClosure {
            first: base,
            second: again,
        });
    }

    let mut rng = ChaCha8Rng::seed_from_u64(options.seed);
    let mut report = GradCheckReport {
        max_rel_error: 0.0,
        coords_checked: 0,
        worst: None,
        tolerance: options.tolerance,
    };
    let h = options.step;
    for pi in 0..params.len() {
        let id = super::params::ParamId(pi);
        if let Some(prefix) = options.name_prefix {
            if !params.get(id).name.starts_with(prefix) {
                continue;
            }
        }
        let len = params.get(id).value.len();
        let coords: Vec<usize> = match options.max_coords_per_param {
            Some(k) if k < len => sample(&mut rng, len, k).into_vec(),
            _ => (0..len).collect(),
        };
        for idx in coords {
            let original = params.get(id).value.as_slice().expect("standard layout")[idx];
            let eval = |params: &mut ParamSet, x: f64, loss: &mut F| -> Result<f64> {
                params
                    .get_mut(id)
                    .value
                    .as_slice_mut()
                    .expect("standard layout")[idx] = x;
                params.zero_grad();
                loss(params)
            };
            let plus = eval(params, original + h, &mut loss)?;
            let minus = eval(params, original - h, &mut loss)?;
            params
                .get_mut(id)
                .value
                .as_slice_mut()
                .expect("standard layout")[idx] = original;

            let numeric = (plus - minus) / (2.0 * h);
            let a = analytic[pi].as_slice().expect("standard layout")[idx];
            let rel = (a - numeric).abs() / a.abs().max(numeric.abs()).max(options.abs_floor);
            report.coords_checked += 1;
            if rel > report.max_rel_error || report.worst.is_none() {
                report.max_rel_error = report.max_rel_error.max(rel);
                report.worst = Some(CoordError {
                    param: params.get(id).name.clone(),
                    index: idx,
                    analytic: a,
                    numeric,
                    rel_error: rel,
                });
            }
        }
    }
    params.zero_grad();
    for (p, g) in params.iter_mut().zip(analytic) {
        p.grad = g;
    }
    Ok(report)
}
