//! Sparse ("lazy") Adam: only rows present in the gradient are updated, and
//! only their moments advance. The step counter is global, so a row touched
//! for the first time at step `t` gets the bias correction of step `t`.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::models::{Gradients, ModelState, RowGrads};

#[derive(Clone, Debug)]
pub struct OptimizerState {
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    step: u64,
    entity_m: Vec<f32>,
    entity_v: Vec<f32>,
    relation_m: Vec<f32>,
    relation_v: Vec<f32>,
}

impl OptimizerState {
    pub fn new(state: &ModelState) -> Self {
        OptimizerState {
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
            step: 0,
            entity_m: vec![0.0; state.entity_table().len()],
            entity_v: vec![0.0; state.entity_table().len()],
            relation_m: vec![0.0; state.relation_table().len()],
            relation_v: vec![0.0; state.relation_table().len()],
        }
    }

    pub fn step(&self) -> u64 {
        self.step
    }

    pub fn entity_moments(&self) -> (&[f32], &[f32]) {
        (&self.entity_m, &self.entity_v)
    }
}

fn check_finite(grads: &RowGrads, table: &'static str) -> Result<()> {
    for (row, values) in grads.iter() {
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFiniteGradient { table, row });
        }
    }
    Ok(())
}

/// One Adam update of the rows in `grads`. Fails before touching anything
/// if a gradient is non-finite.
pub fn adam_step(opt: &mut OptimizerState, state: &mut ModelState, grads: &Gradients, lr: f64) -> Result<()> {
    if opt.entity_m.len() != state.entity_table().len() || opt.relation_m.len() != state.relation_table().len() {
        return Err(Error::Shape("optimizer moments do not match model tables".into()));
    }
    check_finite(&grads.entities, "entity")?;
    check_finite(&grads.relations, "relation")?;

    opt.step += 1;
    let t = opt.step as f64;
    let (b1, b2, eps) = (opt.beta1, opt.beta2, opt.eps);
    let bc1 = 1.0 - libm::pow(b1, t);
    let bc2 = 1.0 - libm::pow(b2, t);
    let (entities, relations) = state.tables_mut();
    let update = |table: &mut [f32], m: &mut [f32], v: &mut [f32], grads: &RowGrads| {
        let w = grads.width();
        for (row, g) in grads.iter() {
            let base = row as usize * w;
            for (i, &gi) in g.iter().enumerate() {
                let j = base + i;
                let mi = b1 * m[j] as f64 + (1.0 - b1) * gi;
                let vi = b2 * v[j] as f64 + (1.0 - b2) * gi * gi;
                m[j] = mi as f32;
                v[j] = vi as f32;
                let step = lr * (mi / bc1) / (libm::sqrt(vi / bc2) + eps);
                table[j] = (table[j] as f64 - step) as f32;
            }
        }
    };
    update(entities, &mut opt.entity_m, &mut opt.entity_v, &grads.entities);
    update(relations, &mut opt.relation_m, &mut opt.relation_v, &grads.relations);
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::ModelKind;

    fn fresh() -> (ModelState, OptimizerState) {
        let s = ModelState::init(ModelKind::DistMult, 3, 4, 2, 5).unwrap();
        let o = OptimizerState::new(&s);
        (s, o)
    }

    #[test]
    fn zero_gradient_leaves_tables() {
        let (mut s, mut o) = fresh();
        let before = s.clone();
        let mut g = Gradients::for_state(&s);
        for e in 0..4 {
            g.entities.row_mut(e);
        }
        adam_step(&mut o, &mut s, &g, 0.1).unwrap();
        assert_eq!(s, before);
    }

    #[test]
    fn first_step_moves_by_lr_against_sign() {
        let (mut s, mut o) = fresh();
        let before = s.clone();
        let mut g = Gradients::for_state(&s);
        g.entities.row_mut(1).copy_from_slice(&[0.5, -2.0, 1e-3]);
        let lr = 1e-2;
        adam_step(&mut o, &mut s, &g, lr).unwrap();
        let expect = [-1.0, 1.0, -1.0];
        for i in 0..3 {
            let delta = s.entity_row(crate::kg::EntityId(1))[i] as f64 - before.entity_row(crate::kg::EntityId(1))[i] as f64;
            assert!((delta - lr * expect[i]).abs() < 1e-6 * 2.0 + lr * 1e-4, "{delta}");
        }
        // untouched rows and their moments are unchanged
        assert_eq!(s.entity_row(crate::kg::EntityId(0)), before.entity_row(crate::kg::EntityId(0)));
        assert!(o.entity_moments().0[..3].iter().all(|&m| m == 0.0));
    }

    #[test]
    fn non_finite_gradient_fails_fast() {
        let (mut s, mut o) = fresh();
        let before = s.clone();
        let mut g = Gradients::for_state(&s);
        g.entities.row_mut(0)[0] = 1.0;
        g.relations.row_mut(1)[2] = f64::NAN;
        let err = adam_step(&mut o, &mut s, &g, 0.1).unwrap_err();
        assert_eq!(err, Error::NonFiniteGradient { table: "relation", row: 1 });
        assert_eq!(s, before);
        assert_eq!(o.step(), 0);
    }
}
