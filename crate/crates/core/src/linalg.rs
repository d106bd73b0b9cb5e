//! Dense complex Householder QR with column pivoting, at working precision.

use rug::Float;

use crate::num::BigComplex;

/// Row-major `m × n` matrix.
pub type Matrix = Vec<Vec<BigComplex>>;

/// `A·Π = Q·R`, with `Q` kept as Householder reflectors.
#[derive(Clone, Debug)]
pub struct Qr {
    rows: usize,
    cols: usize,
    /// Upper triangle holds `R`; below it is scratch.
    a: Matrix,
    /// Unit reflector vectors `v_k` acting on rows `k..m`.
    reflectors: Vec<Vec<BigComplex>>,
    /// `perm[k]` is the original column placed at position `k`.
    perm: Vec<usize>,
}

/// `H = I − 2vv*` mapping `x` onto a multiple of `e₁`; returns `None` for a zero column.
fn reflector(x: &[BigComplex]) -> Option<Vec<BigComplex>> {
    let p = x[0].prec();
    let mut nrm2 = Float::with_val(p, 0);
    for xi in x {
        nrm2 += xi.norm_sqr();
    }
    if nrm2.is_zero() {
        return None;
    }
    let nrm = nrm2.sqrt();
    // phase of x₀ avoids cancellation in v₀
    let phase = if x[0].is_zero() { BigComplex::one(p) } else { x[0].scale(&x[0].abs().recip()) };
    let mut v: Vec<BigComplex> = x.to_vec();
    v[0] += &phase.scale(&nrm);
    let mut vn = Float::with_val(p, 0);
    for vi in &v {
        vn += vi.norm_sqr();
    }
    let inv = vn.sqrt().recip();
    Some(v.iter().map(|vi| vi.scale(&inv)).collect())
}

/// `y ← y − 2v(v*·y)` on the tail starting at `k`.
fn apply_reflector(v: &[BigComplex], y: &mut [BigComplex], k: usize) {
    let p = y[k].prec();
    let mut dot = BigComplex::zero(p);
    for (vi, yi) in v.iter().zip(&y[k..]) {
        dot.mul_acc(&vi.conj(), yi);
    }
    let dot = dot.scale_i64(2);
    for (vi, yi) in v.iter().zip(&mut y[k..]) {
        yi.mul_sub(vi, &dot);
    }
}

impl Qr {
    pub fn new(matrix: &Matrix) -> Self {
        let rows = matrix.len();
        let cols = if rows == 0 { 0 } else { matrix[0].len() };
        // column-major copy simplifies pivoting
        let mut c: Matrix = (0..cols).map(|j| (0..rows).map(|i| matrix[i][j].clone()).collect()).collect();
        let mut perm: Vec<usize> = (0..cols).collect();
        let mut reflectors = Vec::new();
        for k in 0..rows.min(cols) {
            let best = (k..cols)
                .max_by(|&x, &y| {
                    let nx: f64 = c[x][k..].iter().map(|z| z.norm_sqr().to_f64()).sum();
                    let ny: f64 = c[y][k..].iter().map(|z| z.norm_sqr().to_f64()).sum();
                    crate::num::cmp_f64(nx, ny)
                })
                .unwrap_or(k);
            c.swap(k, best);
            perm.swap(k, best);
            let Some(v) = reflector(&c[k][k..]) else {
                reflectors.push(Vec::new());
                continue;
            };
            for col in c.iter_mut().skip(k) {
                apply_reflector(&v, col, k);
            }
            reflectors.push(v);
        }
        let a = (0..rows).map(|i| (0..cols).map(|j| c[j][i].clone()).collect()).collect();
        Qr { rows, cols, a, reflectors, perm }
    }

    /// `|R_kk|` in pivot order; non-increasing up to rounding.
    pub fn diagonal(&self) -> Vec<Float> {
        (0..self.rows.min(self.cols)).map(|k| self.a[k][k].abs()).collect()
    }

    /// Count of `|R_kk| > 2^rel_log2 · |R_00|`.
    pub fn rank(&self, rel_log2: f64) -> usize {
        let d = self.diagonal();
        let Some(top) = d.first() else { return 0 };
        if top.is_zero() {
            return 0;
        }
        let top = top.to_f64().log2();
        d.iter().filter(|x| !x.is_zero() && x.to_f64().log2() - top > rel_log2).count()
    }

    /// `log2(|R_00| / |R_last|)`, a lower bound on the 2-norm condition number.
    pub fn cond_log2(&self) -> f64 {
        let d = self.diagonal();
        match (d.first(), d.last()) {
            (Some(a), Some(b)) if !b.is_zero() => a.to_f64().log2() - b.to_f64().log2(),
            (Some(_), Some(_)) => f64::INFINITY,
            _ => 0.0,
        }
    }

    /// Least-squares solution of `A x ≈ b`; rank-deficient trailing columns are set to zero.
    pub fn solve(&self, b: &[BigComplex]) -> Vec<BigComplex> {
        let mut y = b.to_vec();
        for (k, v) in self.reflectors.iter().enumerate() {
            if !v.is_empty() {
                apply_reflector(v, &mut y, k);
            }
        }
        let n = self.rows.min(self.cols);
        let p = b.first().map_or(64, BigComplex::prec);
        let mut z = vec![BigComplex::zero(p); self.cols];
        for k in (0..n).rev() {
            if self.a[k][k].is_zero() {
                continue;
            }
            let mut s = y[k].clone();
            for (akj, zj) in self.a[k][k + 1..n].iter().zip(&z[k + 1..n]) {
                s.mul_sub(akj, zj);
            }
            z[k] = &s / &self.a[k][k];
        }
        let mut x = vec![BigComplex::zero(p); self.cols];
        for (k, &j) in self.perm.iter().enumerate() {
            x[j] = z[k].clone();
        }
        x
    }
}

/// Solution, residual 2-norm and condition estimate of a dense least-squares problem.
#[derive(Clone, Debug)]
pub struct LeastSquares {
    pub x: Vec<BigComplex>,
    pub residual_norm: Float,
    pub cond_log2: f64,
    pub rank: usize,
}

pub fn least_squares(a: &Matrix, b: &[BigComplex], rank_rel_log2: f64) -> LeastSquares {
    let qr = Qr::new(a);
    let x = qr.solve(b);
    let p = b.first().map_or(64, BigComplex::prec);
    let mut r2 = Float::with_val(p, 0);
    for (row, bi) in a.iter().zip(b) {
        let mut s = bi.clone();
        for (aij, xj) in row.iter().zip(&x) {
            s.mul_sub(aij, xj);
        }
        r2 += s.norm_sqr();
    }
    LeastSquares { x, residual_norm: r2.sqrt(), cond_log2: qr.cond_log2(), rank: qr.rank(rank_rel_log2) }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> BigComplex {
        BigComplex::from_f64(200, re, im)
    }

    #[test]
    fn square_solve_recovers_vector() {
        let a = vec![vec![c(2.0, 1.0), c(0.0, 1.0), c(1.0, 0.0)], vec![c(1.0, 0.0), c(3.0, 0.0), c(0.0, -1.0)], vec![
            c(0.5, 0.0),
            c(1.0, 1.0),
            c(4.0, 0.0),
        ]];
        let x = [c(1.0, -1.0), c(0.25, 0.0), c(-2.0, 3.0)];
        let b: Vec<BigComplex> = a
            .iter()
            .map(|row| row.iter().zip(&x).fold(BigComplex::zero(200), |acc, (u, v)| &acc + &(u * v)))
            .collect();
        let ls = least_squares(&a, &b, -150.0);
        assert_eq!(ls.rank, 3);
        for (u, v) in ls.x.iter().zip(&x) {
            assert!((u - v).log2_abs() < -180.0);
        }
    }

    #[test]
    fn detects_rank_deficiency() {
        let a = vec![vec![c(1.0, 0.0), c(2.0, 0.0)], vec![c(2.0, 0.0), c(4.0, 0.0)], vec![c(3.0, 0.0), c(6.0, 0.0)]];
        assert_eq!(Qr::new(&a).rank(-100.0), 1);
    }

    #[test]
    fn overdetermined_line_fit() {
        // y = 1 + 2x sampled exactly
        let xs = [0.0, 1.0, 2.0, 3.0];
        let a: Matrix = xs.iter().map(|&x| vec![c(1.0, 0.0), c(x, 0.0)]).collect();
        let b: Vec<BigComplex> = xs.iter().map(|&x| c(1.0 + 2.0 * x, 0.0)).collect();
        let ls = least_squares(&a, &b, -150.0);
        assert!((&ls.x[1] - &c(2.0, 0.0)).log2_abs() < -180.0);
        assert!(ls.residual_norm.to_f64() < 1e-50);
    }
}
