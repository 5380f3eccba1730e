//! Quadrature rules on simplices, stored in barycentric coordinates.
//!
//! Weights are normalized to sum to one, so an integral over an element is
//! `measure * Σ w_q f(x_q)`.

/// A quadrature rule on a triangle (`N = 3`) or tetrahedron (`N = 4`).
#[derive(Debug, Clone)]
pub struct QuadratureRule<const N: usize> {
    pub points: Vec<[f64; N]>,
    pub weights: Vec<f64>,
    /// Highest total polynomial degree integrated exactly.
    pub degree: usize,
}

pub type TriangleRule = QuadratureRule<3>;
pub type TetRule = QuadratureRule<4>;

impl<const N: usize> QuadratureRule<N> {
    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&[f64; N], f64)> {
        self.points.iter().zip(self.weights.iter().copied())
    }
}

fn orbit3(a: f64, w: f64, points: &mut Vec<[f64; 3]>, weights: &mut Vec<f64>) {
    let b = 1.0 - 2.0 * a;
    for p in [[a, a, b], [a, b, a], [b, a, a]] {
        points.push(p);
        weights.push(w);
    }
}

fn orbit4_1(a: f64, w: f64, points: &mut Vec<[f64; 4]>, weights: &mut Vec<f64>) {
    let b = 1.0 - 3.0 * a;
    for i in 0..4 {
        let mut p = [a; 4];
        p[i] = b;
        points.push(p);
        weights.push(w);
    }
}

fn orbit4_2(a: f64, w: f64, points: &mut Vec<[f64; 4]>, weights: &mut Vec<f64>) {
    let b = 0.5 - a;
    for (i, j) in [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)] {
        let mut p = [b; 4];
        p[i] = a;
        p[j] = a;
        points.push(p);
        weights.push(w);
    }
}

/// Vertex-centroid rule, exact for linear functions.
pub fn triangle_degree1() -> TriangleRule {
    QuadratureRule {
        points: vec![[1.0 / 3.0; 3]],
        weights: vec![1.0],
        degree: 1,
    }
}

/// Six-point symmetric rule of degree 4 (Dunavant).
pub fn triangle_degree4() -> TriangleRule {
    let mut points = Vec::with_capacity(6);
    let mut weights = Vec::with_capacity(6);
    orbit3(0.445_948_490_915_964_886_32, 0.223_381_589_678_011_465_70, &mut points, &mut weights);
    orbit3(0.091_576_213_509_770_743_46, 0.109_951_743_655_321_867_64, &mut points, &mut weights);
    QuadratureRule { points, weights, degree: 4 }
}

/// Four-point rule of degree 2.
pub fn tet_degree2() -> TetRule {
    let mut points = Vec::with_capacity(4);
    let mut weights = Vec::with_capacity(4);
    let a = (5.0 - 5.0_f64.sqrt()) / 20.0;
    orbit4_1(a, 0.25, &mut points, &mut weights);
    QuadratureRule { points, weights, degree: 2 }
}

/// Fourteen-point rule of degree 5 with positive weights.
pub fn tet_degree5() -> TetRule {
    let mut points = Vec::with_capacity(14);
    let mut weights = Vec::with_capacity(14);
    // weights below are for the reference volume 1/6; rescale to unit sum
    orbit4_1(
        0.092_735_250_310_891_226_4,
        6.0 * 0.012_248_840_519_393_658_2,
        &mut points,
        &mut weights,
    );
    orbit4_1(
        0.310_885_919_263_300_609_8,
        6.0 * 0.018_781_320_953_002_641_8,
        &mut points,
        &mut weights,
    );
    orbit4_2(
        0.045_503_704_125_649_649_5,
        6.0 * 0.007_091_003_462_846_911_1,
        &mut points,
        &mut weights,
    );
    QuadratureRule { points, weights, degree: 5 }
}

/// Volume rule used for outer spaces of polynomial degree `k`.
pub fn tet_rule_for_degree(k: usize) -> TetRule {
    if k <= 1 {
        tet_degree2()
    } else {
        tet_degree5()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn factorial(n: u32) -> f64 {
        (1..=n).map(f64::from).product()
    }

    // ∫_ref x^a y^b (z^c) over the reference simplex, divided by its measure.
    fn simplex_moment(exps: &[u32]) -> f64 {
        let d = exps.len() as u32;
        let num: f64 = exps.iter().map(|&e| factorial(e)).product();
        let sum: u32 = exps.iter().sum();
        num * factorial(d) / factorial(sum + d)
    }

    #[test]
    fn triangle_rules_are_exact() {
        for rule in [triangle_degree1(), triangle_degree4()] {
            assert!(rule.weights.iter().all(|&w| w > 0.0));
            assert!((rule.weights.iter().sum::<f64>() - 1.0).abs() < 1e-14);
            for a in 0..=rule.degree as u32 {
                for b in 0..=(rule.degree as u32 - a) {
                    let q: f64 = rule
                        .iter()
                        .map(|(p, w)| w * p[1].powi(a as i32) * p[2].powi(b as i32))
                        .sum();
                    let exact = simplex_moment(&[a, b]);
                    assert!((q - exact).abs() < 1e-14, "x^{a} y^{b}: {q} vs {exact}");
                }
            }
        }
    }

    #[test]
    fn tet_rules_are_exact() {
        for rule in [tet_degree2(), tet_degree5()] {
            assert!(rule.weights.iter().all(|&w| w > 0.0));
            assert!((rule.weights.iter().sum::<f64>() - 1.0).abs() < 1e-14);
            let deg = rule.degree as u32;
            for a in 0..=deg {
                for b in 0..=(deg - a) {
                    for c in 0..=(deg - a - b) {
                        let q: f64 = rule
                            .iter()
                            .map(|(p, w)| {
                                w * p[1].powi(a as i32) * p[2].powi(b as i32) * p[3].powi(c as i32)
                            })
                            .sum();
                        let exact = simplex_moment(&[a, b, c]);
                        assert!((q - exact).abs() < 1e-13, "x^{a} y^{b} z^{c}: {q} vs {exact}");
                    }
                }
            }
        }
    }

    #[test]
    fn degree4_triangle_rule_misses_degree6() {
        let rule = triangle_degree4();
        let q: f64 = rule.iter().map(|(p, w)| w * p[1].powi(6)).sum();
        assert!((q - simplex_moment(&[6, 0])).abs() > 1e-8);
    }
}
