use serde::{Deserialize, Serialize};

use super::path::{AttrValue, AttributePath};
use super::tracker::DeviationEvent;
use super::NoveltyError;
use crate::board::{DiceSpec, Die};

/// Smallest prior concentration; keeps every MAP denominator positive.
pub const PRIOR_FLOOR: f64 = 2.0;

/// Dirichlet posterior over the faces of one die.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DieBelief {
    pub faces: Vec<i64>,
    pub alpha: Vec<f64>,
    pub prior: Vec<f64>,
}

impl DieBelief {
    /// Number of observed rolls, `Σ(α − prior)`.
    pub fn n(&self) -> f64 {
        self.alpha.iter().zip(&self.prior).map(|(a, p)| a - p).sum()
    }

    fn observe(&mut self, face: i64) -> bool {
        match self.faces.iter().position(|&f| f == face) {
            Some(i) => {
                self.alpha[i] += 1.0;
                false
            }
            None => {
                self.faces.push(face);
                self.prior.push(PRIOR_FLOOR);
                self.alpha.push(PRIOR_FLOOR + 1.0);
                true
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiceBeliefs {
    pub dice: Vec<DieBelief>,
    /// Number of dice in the most recent roll.
    pub die_count: usize,
    /// `(die, face)` pairs seen outside the known support.
    pub extended: Vec<(usize, i64)>,
}

impl DiceBeliefs {
    /// Prior centred on `dice`: `α_i = max(2, 1 + strength·w_i)`, so the MAP
    /// before any data is the board weight vector (exactly, once
    /// `strength·w_i ≥ 1`). `strength = 0` gives the flat floor prior.
    pub fn new(dice: &DiceSpec, strength: f64) -> Self {
        let beliefs = dice
            .dice
            .iter()
            .map(|d| {
                let prior: Vec<f64> = d
                    .weights
                    .iter()
                    .map(|w| (1.0 + strength * w).max(PRIOR_FLOOR))
                    .collect();
                DieBelief {
                    faces: d.faces.clone(),
                    alpha: prior.clone(),
                    prior,
                }
            })
            .collect();
        DiceBeliefs {
            dice: beliefs,
            die_count: dice.dice.len(),
            extended: Vec::new(),
        }
    }

    /// Explicit prior vector for one die, as in `α = (2, 2)`.
    pub fn from_alpha(faces: Vec<i64>, alpha: Vec<f64>) -> Self {
        DiceBeliefs {
            dice: vec![DieBelief {
                faces,
                prior: alpha.clone(),
                alpha,
            }],
            die_count: 1,
            extended: Vec::new(),
        }
    }

    /// MAP dice model over the observed support.
    pub fn map_model(&self) -> Result<DiceSpec, NoveltyError> {
        let dice = (0..self.dice.len())
            .map(|d| {
                Ok(Die {
                    faces: self.dice[d].faces.clone(),
                    weights: dice_map_estimate(self, d)?,
                })
            })
            .collect::<Result<_, NoveltyError>>()?;
        Ok(DiceSpec { dice })
    }
}

/// Count one roll. A different number of dice resizes the belief; unseen
/// faces extend the support and are flagged.
pub fn update_dice_beliefs(beliefs: &mut DiceBeliefs, faces: &[i64]) {
    beliefs.die_count = faces.len();
    while beliefs.dice.len() < faces.len() {
        beliefs.dice.push(DieBelief {
            faces: Vec::new(),
            alpha: Vec::new(),
            prior: Vec::new(),
        });
    }
    for (d, &face) in faces.iter().enumerate() {
        if beliefs.dice[d].observe(face) && !beliefs.extended.contains(&(d, face)) {
            beliefs.extended.push((d, face));
        }
    }
}

/// Posterior mode `p_i = (α_i − 1) / (Σα − K)`.
pub fn dice_map_estimate(beliefs: &DiceBeliefs, die: usize) -> Result<Vec<f64>, NoveltyError> {
    let b = beliefs
        .dice
        .get(die)
        .ok_or_else(|| NoveltyError::Degenerate(format!("no die {die}")))?;
    let k = b.alpha.len() as f64;
    let denom: f64 = b.alpha.iter().sum::<f64>() - k;
    if b.alpha.is_empty() || denom <= 0.0 {
        return Err(NoveltyError::Degenerate(format!("die {die}: Σα − K = {denom}")));
    }
    Ok(b.alpha.iter().map(|a| (a - 1.0) / denom).collect())
}

/// `KL(p ‖ q)` in nats; infinite when `p` puts mass where `q` has none.
pub fn kl_divergence(p: &[f64], q: &[f64]) -> f64 {
    p.iter()
        .zip(q)
        .filter(|(pi, _)| **pi > 0.0)
        .map(|(pi, qi)| if *qi > 0.0 { pi * (pi / qi).ln() } else { f64::INFINITY })
        .sum()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DriftParams {
    pub n_min: f64,
    pub tau: f64,
}

impl Default for DriftParams {
    fn default() -> Self {
        DriftParams { n_min: 60.0, tau: 0.02 }
    }
}

/// Structure and weight-drift checks of the beliefs against the dice the
/// player expects.
pub fn detect_dice_novelty(
    beliefs: &DiceBeliefs,
    known: &DiceSpec,
    params: &DriftParams,
    game_index: usize,
) -> Vec<DeviationEvent> {
    let mut out = Vec::new();
    let deviation = |path: AttributePath, expected, observed, confidence| DeviationEvent {
        path: path.to_string(),
        expected,
        observed,
        game_index,
        confidence,
    };
    if beliefs.die_count != known.dice.len() {
        out.push(deviation(
            AttributePath::DiceCount,
            AttrValue::Num(known.dice.len() as f64),
            AttrValue::Num(beliefs.die_count as f64),
            1.0,
        ));
        return out;
    }
    for &(die, face) in &beliefs.extended {
        if known.dice.get(die).is_some_and(|d| !d.faces.contains(&face)) {
            out.push(deviation(
                AttributePath::DieFace { die, face },
                AttrValue::Text("absent".into()),
                AttrValue::Text("present".into()),
                1.0,
            ));
        }
    }
    for (d, (belief, spec)) in beliefs.dice.iter().zip(&known.dice).enumerate() {
        let n = belief.n();
        if n < params.n_min || belief.faces.iter().any(|f| !spec.faces.contains(f)) {
            continue;
        }
        let Ok(map) = dice_map_estimate(beliefs, d) else {
            continue;
        };
        let q: Vec<f64> = belief
            .faces
            .iter()
            .map(|f| {
                let i = spec.faces.iter().position(|g| g == f).expect("face in spec");
                spec.weights[i]
            })
            .collect();
        let kl = kl_divergence(&map, &q);
        if kl > params.tau {
            let confidence = 1.0 - (-n * kl).exp();
            out.push(deviation(
                AttributePath::DieBias(d),
                AttrValue::Num(0.0),
                AttrValue::Num(kl),
                confidence,
            ));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counting() {
        let mut b = DiceBeliefs::from_alpha(vec![1, 2], vec![2.0, 2.0]);
        update_dice_beliefs(&mut b, &[1]);
        assert_eq!(b.dice[0].alpha, vec![3.0, 2.0]);
        for _ in 0..9 {
            update_dice_beliefs(&mut b, &[1]);
        }
        assert_eq!(b.dice[0].alpha, vec![12.0, 2.0]);
        assert_eq!(b.dice[0].n(), 10.0);
    }

    #[test]
    fn new_face_extends_support() {
        let mut b = DiceBeliefs::from_alpha(vec![1, 2], vec![2.0, 2.0]);
        update_dice_beliefs(&mut b, &[3]);
        assert_eq!(b.dice[0].faces, vec![1, 2, 3]);
        assert_eq!(b.extended, vec![(0, 3)]);
        let known = DiceSpec {
            dice: vec![Die::uniform(vec![1, 2])],
        };
        let d = detect_dice_novelty(&b, &known, &DriftParams::default(), 0);
        assert_eq!(d.len(), 1);
        assert_eq!(d[0].path, "dice.0.face.3");
        assert_eq!(d[0].confidence, 1.0);
    }

    #[test]
    fn die_count_change() {
        let known = DiceSpec {
            dice: vec![Die::uniform(vec![1, 2])],
        };
        let mut b = DiceBeliefs::new(&known, 0.0);
        update_dice_beliefs(&mut b, &[1, 2]);
        let d = detect_dice_novelty(&b, &known, &DriftParams::default(), 5);
        assert_eq!(d[0].path, "dice.count");
        assert_eq!(d[0].observed, AttrValue::Num(2.0));
    }

    #[test]
    fn map_closed_forms() {
        let mut b = DiceBeliefs::from_alpha((1..=6).collect(), vec![2.0; 6]);
        assert_eq!(dice_map_estimate(&b, 0).unwrap(), vec![1.0 / 6.0; 6]);
        for _ in 0..10 {
            update_dice_beliefs(&mut b, &[1]);
        }
        assert_eq!(dice_map_estimate(&b, 0).unwrap()[0], 11.0 / 16.0);
        let b = DiceBeliefs::from_alpha(vec![1, 2], vec![3.0, 2.0]);
        let p = dice_map_estimate(&b, 0).unwrap();
        assert!((p[0] - 2.0 / 3.0).abs() < 1e-15 && (p[1] - 1.0 / 3.0).abs() < 1e-15);
        let b = DiceBeliefs::from_alpha(vec![1, 2], vec![1.0, 1.0]);
        assert!(dice_map_estimate(&b, 0).is_err());
    }

    #[test]
    fn biased_die_is_flagged() {
        let known = DiceSpec {
            dice: vec![Die::uniform(vec![1, 2])],
        };
        let mut b = DiceBeliefs::from_alpha(vec![1, 2], vec![2.0, 2.0]);
        for _ in 0..100 {
            update_dice_beliefs(&mut b, &[1]);
        }
        let map = dice_map_estimate(&b, 0).unwrap();
        assert!((map[0] - 101.0 / 102.0).abs() < 1e-15);
        let kl = kl_divergence(&map, &[0.5, 0.5]);
        let oracle = (101.0 / 102.0) * (202.0f64 / 102.0).ln() + (1.0 / 102.0) * (2.0f64 / 102.0).ln();
        assert!((kl - oracle).abs() < 1e-12);
        assert!((kl - 0.638).abs() < 1e-3);
        let d = detect_dice_novelty(&b, &known, &DriftParams::default(), 9);
        assert_eq!(d[0].path, "dice.0.bias");
        assert!(d[0].confidence > 0.99);
    }

    #[test]
    fn informed_prior_starts_at_spec_weights() {
        let spec = DiceSpec {
            dice: vec![Die {
                faces: vec![1, 2, 3],
                weights: vec![0.5, 0.25, 0.25],
            }],
        };
        let b = DiceBeliefs::new(&spec, 200.0);
        let map = dice_map_estimate(&b, 0).unwrap();
        for (m, w) in map.iter().zip(&spec.dice[0].weights) {
            assert!((m - w).abs() < 1e-12);
        }
        assert_eq!(b.dice[0].n(), 0.0);
    }
}
