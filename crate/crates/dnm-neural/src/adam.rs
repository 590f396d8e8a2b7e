//! Adam with bias correction; per-parameter learning rates support the
//! two-group (encoder vs others) schedule.

use ndarray::Array2;

use crate::params::{ParamId, ParamStore};
use crate::tape::Grads;

#[derive(Debug, Clone)]
pub struct AdamState {
    m: Vec<Array2<f64>>,
    v: Vec<Array2<f64>>,
    pub step_count: u64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

impl AdamState {
    pub fn new(store: &ParamStore) -> AdamState {
        let m = store
            .iter()
            .map(|(_, p)| Array2::zeros(p.value.dim()))
            .collect::<Vec<_>>();
        let v = m.clone();
        AdamState {
            m,
            v,
            step_count: 0,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
        }
    }

    /// One update over every parameter; missing gradients are zeros.
    /// `lr_of` maps a parameter to its learning rate.
    pub fn step(
        &mut self,
        store: &mut ParamStore,
        grads: &Grads,
        lr_of: impl Fn(ParamId) -> f64,
    ) {
        self.step_count += 1;
        let t = self.step_count as i32;
        let bc1 = 1.0 - self.beta1.powi(t);
        let bc2 = 1.0 - self.beta2.powi(t);
        for id in 0..store.len() {
            let lr = lr_of(id);
            let m = &mut self.m[id];
            let v = &mut self.v[id];
            m.mapv_inplace(|x| x * self.beta1);
            v.mapv_inplace(|x| x * self.beta2);
            if let Some(g) = grads.get(id) {
                m.scaled_add(1.0 - self.beta1, g);
                let mut g2 = g.clone();
                g2.mapv_inplace(|x| x * x);
                v.scaled_add(1.0 - self.beta2, &g2);
            }
            let value = store.value_mut(id);
            ndarray::Zip::from(value)
                .and(&*m)
                .and(&*v)
                .for_each(|p, &mi, &vi| {
                    let m_hat = mi / bc1;
                    let v_hat = vi / bc2;
                    *p -= lr * m_hat / (v_hat.sqrt() + self.eps);
                });
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn zero_gradient_leaves_parameters_unchanged() {
        let mut store = ParamStore::new();
        let id = store.add("w", array![[1.0, -2.0]]);
        let mut adam = AdamState::new(&store);
        adam.step(&mut store, &Grads::default(), |_| 0.01);
        assert_eq!(store.value(id), &array![[1.0, -2.0]]);
    }

    #[test]
    fn first_step_moves_by_lr_times_sign() {
        let mut store = ParamStore::new();
        let id = store.add("w", array![[1.0]]);
        let mut adam = AdamState::new(&store);

        // Fabricate a gradient through a trivial tape.
        let tape_store = store.clone();
        let mut tape = crate::Tape::new(&tape_store);
        let w = tape.param(id);
        let scaled = tape.scale(w, 3.0); // dL/dw = 3 (positive)
        let loss = tape.sum_all(scaled);
        let grads = tape.backward(loss).unwrap();

        adam.step(&mut store, &grads, |_| 0.01);
        let moved = 1.0 - store.value(id)[[0, 0]];
        assert!((moved - 0.01).abs() < 1e-6, "moved {moved}");
    }

    #[test]
    fn identical_runs_are_identical() {
        let run = || {
            let mut store = ParamStore::new();
            let id = store.add("w", array![[0.5, -0.5]]);
            let mut adam = AdamState::new(&store);
            for _ in 0..5 {
                let snapshot = store.clone();
                let mut tape = crate::Tape::new(&snapshot);
                let w = tape.param(id);
                let sq = tape.mul(w, w).unwrap();
                let loss = tape.sum_all(sq);
                let grads = tape.backward(loss).unwrap();
                adam.step(&mut store, &grads, |_| 0.05);
            }
            store.value(id).clone()
        };
        assert_eq!(run(), run());
    }
}
