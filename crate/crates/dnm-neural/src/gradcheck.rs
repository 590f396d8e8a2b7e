//! Finite-difference gradient verification.

use crate::params::ParamStore;
use crate::tape::{NodeId, Tape};
use crate::{NeuralError, Result};

#[derive(Debug, Clone)]
pub struct GradCheck {
    pub max_rel_err: f64,
    pub worst_param: Option<String>,
    pub worst_index: (usize, usize),
}

/// Compare the tape's analytic gradient of a scalar function against central
/// differences (f(x+e) - f(x-e)) / 2e for every parameter element.
///
/// `build` must be deterministic (dropout off). Relative error is
/// |a - n| / max(1, |a|, |n|); non-finite values fail with the offending
/// parameter and index.
pub fn grad_check(
    store: &mut ParamStore,
    mut build: impl FnMut(&mut Tape<'_>) -> Result<NodeId>,
    eps: f64,
) -> Result<GradCheck> {
    let analytic = {
        let mut tape = Tape::new(store);
        let root = build(&mut tape)?;
        tape.backward(root)?
    };

    let mut report = GradCheck {
        max_rel_err: 0.0,
        worst_param: None,
        worst_index: (0, 0),
    };

    for id in 0..store.len() {
        let (rows, cols) = store.value(id).dim();
        for r in 0..rows {
            for c in 0..cols {
                let original = store.value(id)[[r, c]];

                store.value_mut(id)[[r, c]] = original + eps;
                let f_plus = eval(store, &mut build)?;
                store.value_mut(id)[[r, c]] = original - eps;
                let f_minus = eval(store, &mut build)?;
                store.value_mut(id)[[r, c]] = original;

                let numeric = (f_plus - f_minus) / (2.0 * eps);
                let a = analytic.get(id).map_or(0.0, |g| g[[r, c]]);
                if !numeric.is_finite() || !a.is_finite() {
                    return Err(NeuralError::NonFinite { op: "grad_check" });
                }
                let rel = (a - numeric).abs() / a.abs().max(numeric.abs()).max(1.0);
                if rel > report.max_rel_err {
                    report.max_rel_err = rel;
                    report.worst_param = Some(store.name(id).to_string());
                    report.worst_index = (r, c);
                }
            }
        }
    }
    Ok(report)
}

fn eval(
    store: &ParamStore,
    build: &mut impl FnMut(&mut Tape<'_>) -> Result<NodeId>,
) -> Result<f64> {
    let mut tape = Tape::new(store);
    let root = build(&mut tape)?;
    Ok(tape.scalar(root))
}
