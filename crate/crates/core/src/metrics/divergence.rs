use crate::error::{Error, Result};
use crate::graph::{AnnotatedGraph, LabelDistribution};
use crate::models::Classifier;

/// Distance between two predictive distributions.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Divergence {
    /// `Σ p_i ln(p_i / max(q_i, eps))`, with `0 ln 0 = 0`.
    Kl { eps: f64 },
    L1,
    /// `|p_y − q_y|` for a fixed class, or for the argmax of `p` when `None`.
    PredLikelihood { class: Option<usize> },
    /// 1 when the argmax changes (lowest index wins ties), else 0.
    PredChange,
}

impl Divergence {
    pub const KL_DEFAULT_EPS: f64 = 1e-9;

    pub fn kl() -> Self {
        Divergence::Kl {
            eps: Self::KL_DEFAULT_EPS,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Divergence::Kl { .. } => "kl",
            Divergence::L1 => "l1",
            Divergence::PredLikelihood { .. } => "pred-likelihood",
            Divergence::PredChange => "pred-change",
        }
    }

    pub fn validate(&self) -> Result<()> {
        if let Divergence::Kl { eps } = self {
            if !(*eps > 0.0 && *eps <= 1e-3) {
                return Err(Error::InvalidParameter(format!("kl eps {eps} not in (0, 1e-3]")));
            }
        }
        Ok(())
    }

    /// Largest value the divergence can take, when bounded.
    pub fn range(&self) -> Option<f64> {
        match self {
            Divergence::Kl { .. } => None,
            Divergence::L1 => Some(2.0),
            Divergence::PredLikelihood { .. } | Divergence::PredChange => Some(1.0),
        }
    }

    pub fn eval(&self, p: &LabelDistribution, q: &LabelDistribution) -> Result<f64> {
        if p.classes() != q.classes() {
            return Err(Error::ShapeError(format!(
                "distributions over {} and {} classes",
                p.classes(),
                q.classes()
            )));
        }
        self.validate()?;
        let (p, q) = (p.probs(), q.probs());
        Ok(match *self {
            Divergence::Kl { eps } => p
                .iter()
                .zip(q)
                .filter(|(&pi, _)| pi > 0.0)
                .map(|(&pi, &qi)| pi * (pi / qi.max(eps)).ln())
                .sum::<f64>()
                .max(0.0),
            Divergence::L1 => p.iter().zip(q).map(|(a, b)| (a - b).abs()).sum(),
            Divergence::PredLikelihood { class } => {
                let y = class.unwrap_or_else(|| argmax(p));
                if y >= p.len() {
                    return Err(Error::InvalidParameter(format!("class {y} out of range")));
                }
                (p[y] - q[y]).abs()
            }
            Divergence::PredChange => f64::from(u8::from(argmax(p) != argmax(q))),
        })
    }
}

/// True when the unclamped KL divergence would be infinite.
pub fn kl_unclamped_infinite(p: &LabelDistribution, q: &LabelDistribution) -> bool {
    p.probs().iter().zip(q.probs()).any(|(&pi, &qi)| pi > 0.0 && qi == 0.0)
}

fn argmax(p: &[f64]) -> usize {
    let mut best = 0;
    for (i, &x) in p.iter().enumerate() {
        if x > p[best] {
            best = i;
        }
    }
    best
}

/// `d(p(· | g), p(· | g_prime))`.
pub fn delta<C: Classifier + ?Sized>(
    model: &C,
    g: &AnnotatedGraph,
    g_prime: &AnnotatedGraph,
    d: &Divergence,
    target: Option<usize>,
    target_prime: Option<usize>,
) -> Result<f64> {
    let p = model.evaluate(g, target)?;
    let q = model.evaluate(g_prime, target_prime)?;
    d.eval(&p, &q)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dist(p: &[f64]) -> LabelDistribution {
        LabelDistribution::new(p.to_vec()).unwrap()
    }

    #[test]
    fn examples() {
        let p = dist(&[0.2, 0.5, 0.3]);
        assert_eq!(Divergence::kl().eval(&p, &p).unwrap(), 0.0);
        assert_eq!(Divergence::L1.eval(&dist(&[1.0, 0.0]), &dist(&[0.0, 1.0])).unwrap(), 2.0);
        let kl = Divergence::kl().eval(&dist(&[1.0, 0.0]), &dist(&[0.5, 0.5])).unwrap();
        assert!((kl - std::f64::consts::LN_2).abs() < 1e-15);
        assert!(Divergence::L1.eval(&p, &dist(&[0.5, 0.5])).is_err());
        assert!(Divergence::Kl { eps: 0.1 }.validate().is_err());
    }

    #[test]
    fn kl_is_clamped_and_flagged() {
        let p = dist(&[0.5, 0.5]);
        let q = dist(&[1.0, 0.0]);
        let v = Divergence::kl().eval(&p, &q).unwrap();
        assert!(v.is_finite() && v > 5.0);
        assert!(kl_unclamped_infinite(&p, &q));
        assert!(!kl_unclamped_infinite(&q, &p));
    }

    #[test]
    fn prediction_divergences() {
        let p = dist(&[0.6, 0.4]);
        let q = dist(&[0.4, 0.6]);
        assert_eq!(Divergence::PredChange.eval(&p, &q).unwrap(), 1.0);
        assert_eq!(Divergence::PredChange.eval(&dist(&[0.5, 0.5]), &p).unwrap(), 0.0);
        let pl = Divergence::PredLikelihood { class: None }.eval(&p, &q).unwrap();
        assert!((pl - 0.2).abs() < 1e-15);
        let pl1 = Divergence::PredLikelihood { class: Some(1) }.eval(&p, &q).unwrap();
        assert_eq!(pl, pl1);
    }
}
