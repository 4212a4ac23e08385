use serde::{Deserialize, Serialize};

use super::supermatrix::{super_commutator, SuperMatrix};
use super::Parity;
use crate::error::{Error, Result};
use crate::linalg::{vec_of, CMatrix, LeastSquares, C64, ZERO};

/// Sparse coefficient list `Σ c_k x_k`.
pub type Sparse = Vec<(usize, C64)>;

/// A finite-dimensional super Lie algebra given by a homogeneous basis and
/// structure constants `[x_i, x_j] = Σ_k f_ij^k x_k`.
#[derive(Debug, Clone, PartialEq)]
pub struct SuperLieAlgebraSpec {
    labels: Vec<String>,
    parities: Vec<Parity>,
    brackets: Vec<Sparse>,
}

impl SuperLieAlgebraSpec {
    pub fn new(labels: Vec<String>, parities: Vec<Parity>) -> Result<Self> {
        if labels.len() != parities.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} labels for {} parities",
                labels.len(),
                parities.len()
            )));
        }
        let d = labels.len();
        Ok(SuperLieAlgebraSpec {
            labels,
            parities,
            brackets: vec![Vec::new(); d * d],
        })
    }

    pub fn dim(&self) -> usize {
        self.labels.len()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn parities(&self) -> &[Parity] {
        &self.parities
    }

    /// Sets `[x_i, x_j]` only; the caller is responsible for `[x_j, x_i]`.
    pub fn set_raw(&mut self, i: usize, j: usize, value: Sparse) {
        let d = self.dim();
        self.brackets[i * d + j] = value.into_iter().filter(|(_, c)| *c != ZERO).collect();
    }

    /// Sets `[x_i, x_j]` and fills `[x_j, x_i]` by graded antisymmetry.
    pub fn set_bracket(&mut self, i: usize, j: usize, value: Sparse) {
        let sign = -self.parities[i].koszul_sign(self.parities[j]);
        let swapped: Sparse = value.iter().map(|(k, c)| (*k, c * sign)).collect();
        self.set_raw(i, j, value);
        if i != j {
            self.set_raw(j, i, swapped);
        }
    }

    pub fn bracket_basis(&self, i: usize, j: usize) -> &[(usize, C64)] {
        &self.brackets[i * self.dim() + j]
    }

    pub fn constant(&self, i: usize, j: usize, k: usize) -> C64 {
        self.bracket_basis(i, j)
            .iter()
            .filter(|(kk, _)| *kk == k)
            .map(|(_, c)| *c)
            .sum()
    }

    /// Bilinear extension of the bracket to coordinate vectors.
    pub fn bracket(&self, x: &[C64], y: &[C64]) -> Vec<C64> {
        let mut out = vec![ZERO; self.dim()];
        for (i, xi) in x.iter().enumerate().filter(|(_, c)| **c != ZERO) {
            for (j, yj) in y.iter().enumerate().filter(|(_, c)| **c != ZERO) {
                for (k, c) in self.bracket_basis(i, j) {
                    out[*k] += xi * yj * c;
                }
            }
        }
        out
    }

    fn bracket_with_sparse(&self, i: usize, y: &[(usize, C64)], left: bool, acc: &mut [C64], scale: C64) {
        for (j, yj) in y {
            let terms = if left { self.bracket_basis(i, *j) } else { self.bracket_basis(*j, i) };
            for (k, c) in terms {
                acc[*k] += scale * yj * c;
            }
        }
    }

    /// Max violation of bracket parity additivity and graded antisymmetry.
    pub fn check_axioms(&self) -> f64 {
        let d = self.dim();
        let mut worst: f64 = 0.0;
        for i in 0..d {
            for j in 0..d {
                let p = self.parities[i] + self.parities[j];
                for (k, c) in self.bracket_basis(i, j) {
                    if self.parities[*k] != p {
                        worst = worst.max(c.norm());
                    }
                }
                let sign = self.parities[i].koszul_sign(self.parities[j]);
                for k in 0..d {
                    let r = self.constant(i, j, k) + self.constant(j, i, k) * sign;
                    worst = worst.max(r.norm());
                }
            }
        }
        worst
    }

    /// Reads off structure constants from a basis of square supermatrices
    /// (scalar entries) closed under the supercommutator.
    pub fn from_matrices(labels: Vec<String>, basis: &[SuperMatrix]) -> Result<Self> {
        let parities = basis
            .iter()
            .map(|b| b.parity().ok_or(Error::MixedParity))
            .collect::<Result<Vec<_>>>()?;
        let mut spec = Self::new(labels, parities)?;
        if basis.is_empty() {
            return Ok(spec);
        }
        let bodies: Vec<CMatrix> = basis.iter().map(SuperMatrix::body).collect();
        let len = bodies[0].len();
        let cols = CMatrix::from_fn(len, bodies.len(), |r, c| bodies[c][(r % bodies[c].nrows(), r / bodies[c].nrows())]);
        let ls = LeastSquares::new(cols);
        for i in 0..basis.len() {
            for j in 0..basis.len() {
                let c = super_commutator(&basis[i], &basis[j])?.body();
                let (coeffs, residual) = ls.solve(&vec_of(&c));
                if residual > 1e-9 * (1.0 + c.norm()) {
                    return Err(Error::InvariantViolation(format!(
                        "basis not closed under the supercommutator at ({i},{j}), residual {residual:.3e}"
                    )));
                }
                let sparse: Sparse = coeffs
                    .iter()
                    .enumerate()
                    .filter(|(_, z)| z.norm() > 1e-13)
                    .map(|(k, z)| (k, *z))
                    .collect();
                spec.set_raw(i, j, sparse);
            }
        }
        Ok(spec)
    }
}

/// Max over basis triples of
/// `|[x,[y,z]] - [[x,y],z] - (-1)^{|x||y|} [y,[x,z]]|`.
pub fn check_super_jacobi(spec: &SuperLieAlgebraSpec) -> f64 {
    let d = spec.dim();
    let mut worst: f64 = 0.0;
    let mut acc = vec![ZERO; d];
    for x in 0..d {
        for y in 0..d {
            let sign = C64::new(spec.parities[x].koszul_sign(spec.parities[y]), 0.0);
            let xy = spec.bracket_basis(x, y);
            for z in 0..d {
                acc.iter_mut().for_each(|a| *a = ZERO);
                spec.bracket_with_sparse(x, spec.bracket_basis(y, z), true, &mut acc, C64::new(1.0, 0.0));
                spec.bracket_with_sparse(z, xy, false, &mut acc, C64::new(-1.0, 0.0));
                spec.bracket_with_sparse(y, spec.bracket_basis(x, z), true, &mut acc, -sign);
                for a in &acc {
                    worst = worst.max(a.norm());
                }
            }
        }
    }
    worst
}

#[derive(Serialize, Deserialize)]
struct ConstantEntry {
    i: usize,
    j: usize,
    k: usize,
    value: [f64; 2],
}

#[derive(Serialize, Deserialize)]
struct SpecRepr {
    labels: Vec<String>,
    parities: Vec<Parity>,
    constants: Vec<ConstantEntry>,
}

impl Serialize for SuperLieAlgebraSpec {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let d = self.dim();
        let mut constants = Vec::new();
        for i in 0..d {
            for j in 0..d {
                let mut terms = self.bracket_basis(i, j).to_vec();
                terms.sort_by_key(|(k, _)| *k);
                for (k, c) in terms {
                    // adding 0.0 turns -0.0 into 0.0
                    constants.push(ConstantEntry { i, j, k, value: [c.re + 0.0, c.im + 0.0] });
                }
            }
        }
        SpecRepr {
            labels: self.labels.clone(),
            parities: self.parities.clone(),
            constants,
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for SuperLieAlgebraSpec {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let repr = SpecRepr::deserialize(deserializer)?;
        let mut spec = SuperLieAlgebraSpec::new(repr.labels, repr.parities).map_err(D::Error::custom)?;
        let d = spec.dim();
        for e in repr.constants {
            if e.i >= d || e.j >= d || e.k >= d {
                return Err(D::Error::custom("structure constant index out of range"));
            }
            spec.brackets[e.i * d + e.j].push((e.k, C64::new(e.value[0], e.value[1])));
        }
        Ok(spec)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graded::SuperDim;
    use crate::linalg::re;

    fn gl11() -> SuperLieAlgebraSpec {
        let dim = SuperDim::new(1, 1);
        let basis: Vec<SuperMatrix> = [(0, 0), (1, 1), (0, 1), (1, 0)]
            .iter()
            .map(|&(r, c)| {
                let mut m = CMatrix::zeros(2, 2);
                m[(r, c)] = re(1.0);
                SuperMatrix::from_complex(dim, dim, &m, 0).unwrap()
            })
            .collect();
        let labels = ["E11", "E22", "E12", "E21"].iter().map(|s| s.to_string()).collect();
        SuperLieAlgebraSpec::from_matrices(labels, &basis).unwrap()
    }

    #[test]
    fn gl11_constants() {
        let g = gl11();
        assert_eq!(g.parities(), &[Parity::Even, Parity::Even, Parity::Odd, Parity::Odd]);
        // [E12, E21] = E11 + E22
        assert!((g.constant(2, 3, 0) - re(1.0)).norm() < 1e-12);
        assert!((g.constant(2, 3, 1) - re(1.0)).norm() < 1e-12);
        // [E11, E12] = E12
        assert!((g.constant(0, 2, 2) - re(1.0)).norm() < 1e-12);
        assert!(g.check_axioms() < 1e-12);
        assert!(check_super_jacobi(&g) < 1e-12);
    }

    #[test]
    fn abelian_is_jacobi() {
        let g = SuperLieAlgebraSpec::new(
            vec!["a".into(), "b".into()],
            vec![Parity::Even, Parity::Odd],
        )
        .unwrap();
        assert_eq!(check_super_jacobi(&g), 0.0);
    }

    #[test]
    fn corrupted_constant_breaks_jacobi() {
        let mut g = gl11();
        let doubled: Sparse = g.bracket_basis(0, 2).iter().map(|(k, c)| (*k, c * 2.0)).collect();
        g.set_bracket(0, 2, doubled);
        assert!(g.check_axioms() < 1e-12);
        let r = check_super_jacobi(&g);
        assert!(r > 0.5, "residual {r}");
    }

    #[test]
    fn bracket_of_coordinates_is_bilinear() {
        let g = gl11();
        let x = [re(0.0), re(0.0), re(2.0), re(0.0)];
        let y = [re(0.0), re(0.0), re(0.0), re(3.0)];
        let b = g.bracket(&x, &y);
        assert!((b[0] - re(6.0)).norm() < 1e-12 && (b[1] - re(6.0)).norm() < 1e-12);
    }

    #[test]
    fn not_closed_is_rejected() {
        let dim = SuperDim::new(2, 0);
        let mut a = CMatrix::zeros(2, 2);
        a[(0, 1)] = re(1.0);
        let b = a.transpose();
        let basis = [
            SuperMatrix::from_complex(dim, dim, &a, 0).unwrap(),
            SuperMatrix::from_complex(dim, dim, &b, 0).unwrap(),
        ];
        let err = SuperLieAlgebraSpec::from_matrices(vec!["e".into(), "f".into()], &basis);
        assert!(matches!(err, Err(Error::InvariantViolation(_))));
    }

    #[test]
    fn json_round_trip() {
        let g = gl11();
        let s = serde_json::to_string(&g).unwrap();
        let h: SuperLieAlgebraSpec = serde_json::from_str(&s).unwrap();
        assert!(check_super_jacobi(&h) < 1e-12);
        for i in 0..4 {
            for j in 0..4 {
                for k in 0..4 {
                    assert_eq!(g.constant(i, j, k), h.constant(i, j, k));
                }
            }
        }
    }
}
