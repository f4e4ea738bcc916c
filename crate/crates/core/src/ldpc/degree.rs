use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Degree polynomial as `(degree, coefficient)` pairs. For an
/// edge-perspective polynomial `Σ c_d x^(d-1)` the pair is `(d, c_d)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Polynomial(pub Vec<(usize, f64)>);

impl Polynomial {
    fn validate(&self, name: &str) -> Result<()> {
        if self.0.is_empty() {
            return Err(Error::InfeasibleDegrees(format!("{name} is empty")));
        }
        if self.0.iter().any(|&(d, c)| d == 0 || !(c >= 0.0)) {
            return Err(Error::InfeasibleDegrees(format!("{name} needs positive degrees and nonnegative coefficients")));
        }
        let total: f64 = self.0.iter().map(|c| c.1).sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::InfeasibleDegrees(format!("{name} coefficients sum to {total}, not 1")));
        }
        Ok(())
    }

    /// Node-perspective fractions `(c_d / d) / Σ (c_j / j)`.
    pub fn node_fractions(&self) -> Vec<(usize, f64)> {
        let norm: f64 = self.0.iter().map(|&(d, c)| c / d as f64).sum();
        self.0.iter().map(|&(d, c)| (d, c / d as f64 / norm)).collect()
    }

    /// Average node degree.
    pub fn average_node_degree(&self) -> f64 {
        1.0 / self.0.iter().map(|&(d, c)| c / d as f64).sum::<f64>()
    }

    /// Splits `count` nodes into integer degree groups, rounding by largest
    /// remainder.
    pub fn node_counts(&self, count: usize) -> Vec<(usize, usize)> {
        let fr = self.node_fractions();
        let mut counts: Vec<(usize, usize, f64)> = fr
            .iter()
            .map(|&(d, f)| {
                let exact = f * count as f64;
                (d, exact.floor() as usize, exact - exact.floor())
            })
            .collect();
        let mut missing = count - counts.iter().map(|c| c.1).sum::<usize>();
        let mut order: Vec<usize> = (0..counts.len()).collect();
        order.sort_by(|&a, &b| counts[b].2.total_cmp(&counts[a].2));
        for &i in order.iter().cycle() {
            if missing == 0 {
                break;
            }
            counts[i].1 += 1;
            missing -= 1;
        }
        counts.into_iter().map(|(d, n, _)| (d, n)).collect()
    }
}

/// Edge-perspective degree distribution pair `(λ, ρ)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DegreeDistribution {
    pub lambda: Polynomial,
    pub rho: Polynomial,
}

impl DegreeDistribution {
    pub fn new(lambda: Polynomial, rho: Polynomial) -> Result<Self> {
        lambda.validate("lambda")?;
        rho.validate("rho")?;
        Ok(Self { lambda, rho })
    }

    /// `λ(x) = x/3 + 2x³/3`, `ρ(x) = x⁵`.
    pub fn ira_half_rate() -> Self {
        Self {
            lambda: Polynomial(vec![(2, 1.0 / 3.0), (4, 2.0 / 3.0)]),
            rho: Polynomial(vec![(6, 1.0)]),
        }
    }

    /// Design rate `1 - ∫ρ / ∫λ`.
    pub fn design_rate(&self) -> f64 {
        1.0 - self.lambda.average_node_degree() / self.rho.average_node_degree()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn half_rate_ira_node_perspective() {
        let d = DegreeDistribution::ira_half_rate();
        let f = d.lambda.node_fractions();
        // (1/3)/2 = 1/6 and (2/3)/4 = 1/6
        assert!((f[0].1 - 0.5).abs() < 1e-12 && (f[1].1 - 0.5).abs() < 1e-12);
        assert!((d.lambda.average_node_degree() - 3.0).abs() < 1e-12);
        assert_eq!(d.rho.node_counts(256), vec![(6, 256)]);
        assert_eq!(d.lambda.node_counts(512), vec![(2, 256), (4, 256)]);
        assert!((d.design_rate() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn rounding_keeps_the_total() {
        let p = Polynomial(vec![(2, 0.3), (3, 0.3), (7, 0.4)]);
        let c = p.node_counts(101);
        assert_eq!(c.iter().map(|x| x.1).sum::<usize>(), 101);
    }

    #[test]
    fn rejects_bad_polynomials() {
        assert!(DegreeDistribution::new(Polynomial(vec![(2, 0.5)]), Polynomial(vec![(6, 1.0)])).is_err());
        assert!(DegreeDistribution::new(Polynomial(vec![(0, 1.0)]), Polynomial(vec![(6, 1.0)])).is_err());
    }
}
