//! Primal-dual interior-point solver for block-diagonal linear matrix
//! inequalities
//!
//! ```text
//! minimize  c^T y + offset   subject to   F0 + sum_i y_i F_i >= 0.
//! ```
//!
//! Internally this is the dual of `min <F0, X>` s.t. `<F_i, X> = c_i`,
//! `X >= 0`, solved with the HKM search direction and Mehrotra
//! predictor-corrector steps. Any primal iterate `X` certifies the lower
//! bound `offset - <F0, X>` up to its equality residual.

use alloc::vec;
use alloc::vec::Vec;

#[cfg(not(feature = "std"))]
use num_traits::Float;

use crate::linalg::symmetric_eigen;

/// Symmetric sparse matrix over the block structure; `(block, r, c, v)` with
/// `r <= c` stands for both `(r, c)` and `(c, r)`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SparseSym {
    pub entries: Vec<(usize, usize, usize, f64)>,
}

impl SparseSym {
    pub fn push(&mut self, block: usize, r: usize, c: usize, v: f64) {
        let (r, c) = if r <= c { (r, c) } else { (c, r) };
        self.entries.push((block, r, c, v));
    }

    /// Merges duplicate positions and drops zeros.
    pub fn compress(&mut self) {
        self.entries.sort_by(|a, b| (a.0, a.1, a.2).cmp(&(b.0, b.1, b.2)));
        let mut out: Vec<(usize, usize, usize, f64)> = Vec::with_capacity(self.entries.len());
        for &(b, r, c, v) in &self.entries {
            match out.last_mut() {
                Some(last) if (last.0, last.1, last.2) == (b, r, c) => last.3 += v,
                _ => out.push((b, r, c, v)),
            }
        }
        out.retain(|e| e.3 != 0.0);
        self.entries = out;
    }

    fn full_entries(&self) -> Vec<(usize, usize, usize, f64)> {
        let mut out = Vec::with_capacity(2 * self.entries.len());
        for &(b, r, c, v) in &self.entries {
            out.push((b, r, c, v));
            if r != c {
                out.push((b, c, r, v));
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LmiProblem {
    pub blocks: Vec<usize>,
    pub f0: SparseSym,
    pub f: Vec<SparseSym>,
    pub c: Vec<f64>,
    pub offset: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum SdpStatus {
    Optimal,
    /// No `y` makes the matrix inequality hold.
    Infeasible,
    IterationLimit,
    NumericalFailure,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LmiSolution {
    pub status: SdpStatus,
    /// `c^T y + offset` at the returned `y`.
    pub value: f64,
    /// `offset - <F0, X>`.
    pub dual_bound: f64,
    pub y: Vec<f64>,
    /// Primal matrix `X`, one row-major block per entry of `blocks`.
    pub x: Vec<Vec<f64>>,
    pub gap: f64,
    pub primal_residual: f64,
    pub dual_residual: f64,
    pub iterations: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions {
    pub max_iterations: usize,
    pub gap_tolerance: f64,
    pub feasibility_tolerance: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self { max_iterations: 500, gap_tolerance: 1e-8, feasibility_tolerance: 1e-8 }
    }
}

type Blocks = Vec<Vec<f64>>;

const ACCEPTABLE: f64 = 1e-6;

fn zeros_like(sizes: &[usize]) -> Blocks {
    sizes.iter().map(|&n| vec![0.0; n * n]).collect()
}

fn identity_like(sizes: &[usize], s: f64) -> Blocks {
    let mut out = zeros_like(sizes);
    for (b, &n) in out.iter_mut().zip(sizes) {
        for i in 0..n {
            b[i * n + i] = s;
        }
    }
    out
}

fn add_sparse(dst: &mut Blocks, sizes: &[usize], m: &SparseSym, scale: f64) {
    for &(b, r, c, v) in &m.entries {
        let n = sizes[b];
        dst[b][r * n + c] += scale * v;
        if r != c {
            dst[b][c * n + r] += scale * v;
        }
    }
}

pub(crate) fn inner_sparse(m: &SparseSym, sizes: &[usize], x: &[Vec<f64>]) -> f64 {
    let mut acc = 0.0;
    for &(b, r, c, v) in &m.entries {
        let n = sizes[b];
        acc += if r == c { v * x[b][r * n + c] } else { v * (x[b][r * n + c] + x[b][c * n + r]) };
    }
    acc
}

fn inner(a: &Blocks, b: &Blocks) -> f64 {
    a.iter().zip(b).map(|(x, y)| x.iter().zip(y).map(|(p, q)| p * q).sum::<f64>()).sum()
}

fn frob(a: &Blocks) -> f64 {
    inner(a, a).sqrt()
}

fn matmul(a: &[f64], b: &[f64], n: usize) -> Vec<f64> {
    let mut out = vec![0.0; n * n];
    for i in 0..n {
        for k in 0..n {
            let aik = a[i * n + k];
            if aik == 0.0 {
                continue;
            }
            let row = &b[k * n..(k + 1) * n];
            let dst = &mut out[i * n..(i + 1) * n];
            for (d, r) in dst.iter_mut().zip(row) {
                *d += aik * r;
            }
        }
    }
    out
}

fn symmetrize(a: &mut [f64], n: usize) {
    for i in 0..n {
        for j in (i + 1)..n {
            let v = 0.5 * (a[i * n + j] + a[j * n + i]);
            a[i * n + j] = v;
            a[j * n + i] = v;
        }
    }
}

/// Dot product with independent accumulators so the loop vectorizes.
fn dot(a: &[f64], b: &[f64]) -> f64 {
    let mut acc = [0.0; 8];
    let (ca, cb) = (a.chunks_exact(8), b.chunks_exact(8));
    let (ra, rb) = (ca.remainder(), cb.remainder());
    for (x, y) in ca.zip(cb) {
        for k in 0..8 {
            acc[k] += x[k] * y[k];
        }
    }
    let tail: f64 = ra.iter().zip(rb).map(|(x, y)| x * y).sum();
    acc.iter().sum::<f64>() + tail
}

/// `[a0.b0, a0.b1, a1.b0, a1.b1]`, sharing loads between the four products.
fn dot2x2(a0: &[f64], a1: &[f64], b0: &[f64], b1: &[f64]) -> [f64; 4] {
    let mut acc = [[0.0; 4]; 4];
    let len = a0.len();
    let full = len - len % 4;
    for k in (0..full).step_by(4) {
        let (x0, x1, y0, y1) = (&a0[k..k + 4], &a1[k..k + 4], &b0[k..k + 4], &b1[k..k + 4]);
        for t in 0..4 {
            acc[0][t] += x0[t] * y0[t];
            acc[1][t] += x0[t] * y1[t];
            acc[2][t] += x1[t] * y0[t];
            acc[3][t] += x1[t] * y1[t];
        }
    }
    let mut out = acc.map(|a| a.iter().sum::<f64>());
    for k in full..len {
        out[0] += a0[k] * b0[k];
        out[1] += a0[k] * b1[k];
        out[2] += a1[k] * b0[k];
        out[3] += a1[k] * b1[k];
    }
    out
}

/// Lower Cholesky factor, row-major; `None` if not positive definite.
///
/// Right-looking and blocked so the trailing update reads a panel that stays in cache.
pub(crate) fn cholesky(a: &[f64], n: usize) -> Option<Vec<f64>> {
    const B: usize = 64;
    let mut l = a.to_vec();
    for k0 in (0..n).step_by(B) {
        let k1 = (k0 + B).min(n);
        for i in k0..n {
            for j in k0..k1.min(i + 1) {
                let d = dot(&l[i * n + k0..i * n + j], &l[j * n + k0..j * n + j]);
                let v = l[i * n + j] - d;
                if i == j {
                    if !(v > 0.0) || !v.is_finite() {
                        return None;
                    }
                    l[i * n + i] = v.sqrt();
                } else {
                    l[i * n + j] = v / l[j * n + j];
                }
            }
        }
        let row = |l: &[f64], i: usize| l[i * n + k0..i * n + k1].to_vec();
        let mut i = k1;
        while i < n {
            let i2 = (i + 1).min(n - 1);
            let (a0, a1) = (row(&l, i), row(&l, i2));
            let mut j = k1;
            while j <= i2 {
                let j2 = (j + 1).min(i2);
                let d = dot2x2(&a0, &a1, &l[j * n + k0..j * n + k1], &l[j2 * n + k0..j2 * n + k1]);
                if j <= i {
                    l[i * n + j] -= d[0];
                }
                if j2 != j && j2 <= i {
                    l[i * n + j2] -= d[1];
                }
                if i2 != i {
                    l[i2 * n + j] -= d[2];
                    if j2 != j {
                        l[i2 * n + j2] -= d[3];
                    }
                }
                j += 2;
            }
            i += 2;
        }
    }
    for i in 0..n {
        l[i * n + i + 1..(i + 1) * n].fill(0.0);
    }
    Some(l)
}

/// Solves `L L^T x = b` in place.
pub(crate) fn cholesky_solve(l: &[f64], n: usize, b: &mut [f64]) {
    for i in 0..n {
        let d = dot(&l[i * n..i * n + i], &b[..i]);
        b[i] = (b[i] - d) / l[i * n + i];
    }
    for i in (0..n).rev() {
        let d: f64 = ((i + 1)..n).map(|k| l[k * n + i] * b[k]).sum();
        b[i] = (b[i] - d) / l[i * n + i];
    }
}

/// Inverse of `L^{-1}` (lower triangular).
fn lower_inverse(l: &[f64], n: usize) -> Vec<f64> {
    let mut inv = vec![0.0; n * n];
    for j in 0..n {
        inv[j * n + j] = 1.0 / l[j * n + j];
        for i in (j + 1)..n {
            let s: f64 = (j..i).map(|k| l[i * n + k] * inv[k * n + j]).sum();
            inv[i * n + j] = -s / l[i * n + i];
        }
    }
    inv
}

fn spd_inverse(l: &[f64], n: usize) -> Vec<f64> {
    let li = lower_inverse(l, n);
    // (L L^T)^{-1} = L^{-T} L^{-1}
    let mut out = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..=i {
            let s: f64 = (i..n).map(|k| li[k * n + i] * li[k * n + j]).sum();
            out[i * n + j] = s;
            out[j * n + i] = s;
        }
    }
    out
}

/// Largest `alpha` with `X + alpha dX >= 0`, given the Cholesky factor of `X`.
fn max_step(l: &[f64], dx: &[f64], n: usize) -> f64 {
    let li = lower_inverse(l, n);
    let tmp = matmul(&li, dx, n);
    let mut lt = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            lt[i * n + j] = li[j * n + i];
        }
    }
    let mut m = matmul(&tmp, &lt, n);
    symmetrize(&mut m, n);
    let lmin = if n == 1 { m[0] } else { symmetric_eigen(&m, n).values[0] };
    if lmin >= 0.0 {
        f64::INFINITY
    } else {
        -1.0 / lmin
    }
}

struct Workspace {
    sizes: Vec<usize>,
    full: Vec<Vec<(usize, usize, usize, f64)>>,
}

impl Workspace {
    /// `M_ij = Tr(A_i X A_j S^{-1})` with `A_i = -F_i`.
    fn schur(&self, x: &Blocks, sinv: &Blocks) -> Vec<f64> {
        let m = self.full.len();
        let mut out = vec![0.0; m * m];
        let mut t: Blocks = zeros_like(&self.sizes);
        for i in 0..m {
            for blk in t.iter_mut() {
                blk.iter_mut().for_each(|v| *v = 0.0);
            }
            // T = X F_i S^{-1}: each entry adds an outer product of a column of X and a row of S^{-1}
            for &(b, p, q, v) in &self.full[i] {
                let n = self.sizes[b];
                let (xb, sb, tb) = (&x[b], &sinv[b], &mut t[b]);
                for r in 0..n {
                    let xr = xb[r * n + p] * v;
                    if xr == 0.0 {
                        continue;
                    }
                    let srow = &sb[q * n..(q + 1) * n];
                    let trow = &mut tb[r * n..(r + 1) * n];
                    for (d, s) in trow.iter_mut().zip(srow) {
                        *d += xr * s;
                    }
                }
            }
            for j in i..m {
                let mut acc = 0.0;
                for &(b, r, s, v) in &self.full[j] {
                    let n = self.sizes[b];
                    acc += v * t[b][s * n + r];
                }
                out[i * m + j] = acc;
                out[j * m + i] = acc;
            }
        }
        out
    }

    /// `<F_i, Q>` for a possibly nonsymmetric `Q`.
    fn apply(&self, q: &Blocks) -> Vec<f64> {
        self.full
            .iter()
            .map(|entries| {
                entries
                    .iter()
                    .map(|&(b, r, c, v)| v * q[b][c * self.sizes[b] + r])
                    .sum()
            })
            .collect()
    }
}

/// Solves an [`LmiProblem`]. Deterministic for identical inputs.
pub fn solve_lmi(problem: &LmiProblem, opts: &SolverOptions) -> LmiSolution {
    let sizes = problem.blocks.clone();
    let m = problem.f.len();
    let n_total: usize = sizes.iter().sum();
    let ws = Workspace { sizes: sizes.clone(), full: problem.f.iter().map(SparseSym::full_entries).collect() };

    // standard form: C = F0, A_i = -F_i, b = -c; max b^T y s.t. C - sum y_i A_i = S >= 0
    let b: Vec<f64> = problem.c.iter().map(|v| -v).collect();
    let mut cmat = zeros_like(&sizes);
    add_sparse(&mut cmat, &sizes, &problem.f0, 1.0);
    let norm_c = frob(&cmat);
    let norm_b = b.iter().map(|v| v * v).sum::<f64>().sqrt();
    let scale = 10.0f64.max(norm_c).max(norm_b).max(n_total as f64).sqrt() * 10.0;

    let mut x = identity_like(&sizes, scale);
    let mut s = identity_like(&sizes, scale);
    let mut y = vec![0.0; m];

    let finish = |status, x: Blocks, y: Vec<f64>, iterations, pr, dr| {
        let value = problem.c.iter().zip(&y).map(|(c, y)| c * y).sum::<f64>() + problem.offset;
        let mut f0 = zeros_like(&sizes);
        add_sparse(&mut f0, &sizes, &problem.f0, 1.0);
        let dual_bound = problem.offset - inner(&f0, &x);
        LmiSolution {
            status,
            value,
            dual_bound,
            y,
            x,
            gap: (value - dual_bound).abs(),
            primal_residual: pr,
            dual_residual: dr,
            iterations,
        }
    };

    let fail = |status, acc: &mut Option<(Blocks, Vec<f64>, usize, f64, f64)>, x, y, iter, pr, dr| match acc.take() {
        Some((x, y, iter, pr, dr)) => finish(SdpStatus::Optimal, x, y, iter, pr, dr),
        None => finish(status, x, y, iter, pr, dr),
    };
    let mut last = (f64::INFINITY, f64::INFINITY);
    // fallback when progress stalls just short of the requested tolerances
    let mut acceptable: Option<(Blocks, Vec<f64>, usize, f64, f64)> = None;
    for iter in 0..opts.max_iterations {
        // residuals
        let ax: Vec<f64> = ws.apply(&x).iter().map(|v| -v).collect();
        let rp: Vec<f64> = b.iter().zip(&ax).map(|(bi, ai)| bi - ai).collect();
        let mut rd = cmat.clone();
        for (i, f) in problem.f.iter().enumerate() {
            // C - sum y_i A_i = F0 + sum y_i F_i
            add_sparse(&mut rd, &sizes, f, y[i]);
        }
        for (r, sb) in rd.iter_mut().zip(&s) {
            for (v, w) in r.iter_mut().zip(sb) {
                *v -= w;
            }
        }
        let pr = rp.iter().map(|v| v * v).sum::<f64>().sqrt() / (1.0 + norm_b);
        let dr = frob(&rd) / (1.0 + norm_c);
        let pobj = inner(&cmat, &x);
        let dobj: f64 = b.iter().zip(&y).map(|(p, q)| p * q).sum();
        let gap = (pobj - dobj).abs();
        last = (pr, dr);
        if pr < opts.feasibility_tolerance && dr < opts.feasibility_tolerance && gap < opts.gap_tolerance * (1.0 + pobj.abs().min(dobj.abs())) {
            return finish(SdpStatus::Optimal, x, y, iter, pr, dr);
        }
        if pr < ACCEPTABLE && dr < ACCEPTABLE && gap < ACCEPTABLE * (1.0 + pobj.abs().min(dobj.abs())) {
            acceptable = Some((x.clone(), y.clone(), iter, pr, dr));
        }
        if pr < 1e-6 && pobj < -1e10 {
            return finish(SdpStatus::Infeasible, x, y, iter, pr, dr);
        }

        let mu = inner(&x, &s) / n_total as f64;
        let mut sinv = Vec::with_capacity(sizes.len());
        let mut lx = Vec::with_capacity(sizes.len());
        let mut ls = Vec::with_capacity(sizes.len());
        for (k, &n) in sizes.iter().enumerate() {
            let (Some(l1), Some(l2)) = (cholesky(&s[k], n), cholesky(&x[k], n)) else {
                return fail(SdpStatus::NumericalFailure, &mut acceptable, x, y, iter, pr, dr);
            };
            sinv.push(spd_inverse(&l1, n));
            ls.push(l1);
            lx.push(l2);
        }

        let mut schur = ws.schur(&x, &sinv);
        // A_i = -F_i enters twice in M, so the sign cancels
        let lm = match cholesky(&schur, m) {
            Some(l) => l,
            None => {
                // tiny regularization for rank-deficient Schur complements
                let reg = 1e-14 * (0..m).map(|i| schur[i * m + i]).fold(0.0, f64::max).max(1e-300);
                for i in 0..m {
                    schur[i * m + i] += reg;
                }
                match cholesky(&schur, m) {
                    Some(l) => l,
                    None => return fail(SdpStatus::NumericalFailure, &mut acceptable, x, y, iter, pr, dr),
                }
            }
        };

        // X Rd S^{-1}
        let x_rd_sinv: Blocks = sizes
            .iter()
            .enumerate()
            .map(|(k, &n)| matmul(&matmul(&x[k], &rd[k], n), &sinv[k], n))
            .collect();
        // <A_i, X Rd S^{-1}> = -<F_i, .>
        let a_xrs: Vec<f64> = ws.apply(&x_rd_sinv).iter().map(|v| -v).collect();

        let direction = |rc: &Blocks| -> (Vec<f64>, Blocks, Blocks) {
            let rc_sinv: Blocks = sizes.iter().enumerate().map(|(k, &n)| matmul(&rc[k], &sinv[k], n)).collect();
            let a_rcs: Vec<f64> = ws.apply(&rc_sinv).iter().map(|v| -v).collect();
            let mut dy: Vec<f64> = (0..m).map(|i| b[i] - a_rcs[i] + a_xrs[i]).collect();
            cholesky_solve(&lm, m, &mut dy);
            // dS = Rd - sum dy_i A_i = Rd + sum dy_i F_i
            let mut ds = rd.clone();
            for (i, f) in problem.f.iter().enumerate() {
                add_sparse(&mut ds, &sizes, f, dy[i]);
            }
            let mut dx = Vec::with_capacity(sizes.len());
            for (k, &n) in sizes.iter().enumerate() {
                let xds = matmul(&x[k], &ds[k], n);
                let mut d = matmul(&xds, &sinv[k], n);
                for ((dv, rv), xv) in d.iter_mut().zip(&rc_sinv[k]).zip(&x[k]) {
                    *dv = rv - xv - *dv;
                }
                symmetrize(&mut d, n);
                dx.push(d);
            }
            (dy, dx, ds)
        };

        let step = |dx: &Blocks, ds: &Blocks| -> (f64, f64) {
            let mut ap = f64::INFINITY;
            let mut ad = f64::INFINITY;
            for (k, &n) in sizes.iter().enumerate() {
                ap = ap.min(max_step(&lx[k], &dx[k], n));
                ad = ad.min(max_step(&ls[k], &ds[k], n));
            }
            (ap, ad)
        };

        // predictor
        let zero = zeros_like(&sizes);
        let (_, dxa, dsa) = direction(&zero);
        let (apa, ada) = step(&dxa, &dsa);
        let (apa, ada) = (apa.min(1.0), ada.min(1.0));
        let mut xa = x.clone();
        let mut sa = s.clone();
        for k in 0..sizes.len() {
            for (v, d) in xa[k].iter_mut().zip(&dxa[k]) {
                *v += apa * d;
            }
            for (v, d) in sa[k].iter_mut().zip(&dsa[k]) {
                *v += ada * d;
            }
        }
        let mu_aff = inner(&xa, &sa) / n_total as f64;
        let sigma = (mu_aff / mu).max(0.0).powi(3).min(1.0);

        // corrector: R_c = sigma mu I - dXa dSa
        let rc: Blocks = sizes
            .iter()
            .enumerate()
            .map(|(k, &n)| {
                let mut r = matmul(&dxa[k], &dsa[k], n);
                r.iter_mut().for_each(|v| *v = -*v);
                for i in 0..n {
                    r[i * n + i] += sigma * mu;
                }
                r
            })
            .collect();
        let (dy, dx, ds) = direction(&rc);
        let (ap, ad) = step(&dx, &ds);
        let gamma = 0.9 + 0.09 * apa.min(ada);
        let ap = (gamma * ap).min(1.0);
        let ad = (gamma * ad).min(1.0);
        for k in 0..sizes.len() {
            for (v, d) in x[k].iter_mut().zip(&dx[k]) {
                *v += ap * d;
            }
            for (v, d) in s[k].iter_mut().zip(&ds[k]) {
                *v += ad * d;
            }
        }
        for (v, d) in y.iter_mut().zip(&dy) {
            *v += ad * d;
        }
        if !y.iter().all(|v| v.is_finite()) {
            return fail(SdpStatus::NumericalFailure, &mut acceptable, x, y, iter + 1, pr, dr);
        }
    }
    fail(SdpStatus::IterationLimit, &mut acceptable, x, y, opts.max_iterations, last.0, last.1)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_by_two_boundary() {
        // minimize x s.t. [[1, x], [x, 1]] >= 0
        let mut f0 = SparseSym::default();
        f0.push(0, 0, 0, 1.0);
        f0.push(0, 1, 1, 1.0);
        let mut f1 = SparseSym::default();
        f1.push(0, 0, 1, 1.0);
        let p = LmiProblem { blocks: vec![2], f0, f: vec![f1], c: vec![1.0], offset: 0.0 };
        let sol = solve_lmi(&p, &SolverOptions::default());
        assert_eq!(sol.status, SdpStatus::Optimal);
        assert!((sol.value + 1.0).abs() < 1e-7, "{}", sol.value);
        assert!((sol.dual_bound + 1.0).abs() < 1e-7);
    }

    #[test]
    fn linear_program_with_scalar_blocks() {
        // minimize y1 + 2 y2 s.t. y1 >= 1, y2 >= 0.5, y1 + y2 >= 2
        let mut f0 = SparseSym::default();
        f0.push(0, 0, 0, -1.0);
        f0.push(1, 0, 0, -0.5);
        f0.push(2, 0, 0, -2.0);
        let mut f1 = SparseSym::default();
        f1.push(0, 0, 0, 1.0);
        f1.push(2, 0, 0, 1.0);
        let mut f2 = SparseSym::default();
        f2.push(1, 0, 0, 1.0);
        f2.push(2, 0, 0, 1.0);
        let p = LmiProblem { blocks: vec![1, 1, 1], f0, f: vec![f1, f2], c: vec![1.0, 2.0], offset: 0.0 };
        let sol = solve_lmi(&p, &SolverOptions::default());
        assert_eq!(sol.status, SdpStatus::Optimal);
        assert!((sol.value - 2.5).abs() < 1e-7, "{}", sol.value);
    }

    #[test]
    fn detects_infeasibility() {
        // y >= 1 and -y >= 0
        let mut f0 = SparseSym::default();
        f0.push(0, 0, 0, -1.0);
        let mut f1 = SparseSym::default();
        f1.push(0, 0, 0, 1.0);
        f1.push(1, 0, 0, -1.0);
        let p = LmiProblem { blocks: vec![1, 1], f0, f: vec![f1], c: vec![0.0], offset: 0.0 };
        let sol = solve_lmi(&p, &SolverOptions::default());
        assert_ne!(sol.status, SdpStatus::Optimal);
    }

    #[test]
    fn cholesky_round_trip() {
        let a = [4.0, 2.0, 0.4, 2.0, 5.0, 1.0, 0.4, 1.0, 3.0];
        let l = cholesky(&a, 3).unwrap();
        let inv = spd_inverse(&l, 3);
        let prod = matmul(&a, &inv, 3);
        for i in 0..3 {
            for j in 0..3 {
                let e = if i == j { 1.0 } else { 0.0 };
                assert!((prod[i * 3 + j] - e).abs() < 1e-12);
            }
        }
        let mut b = [1.0, 2.0, 3.0];
        cholesky_solve(&l, 3, &mut b);
        let back: Vec<f64> = (0..3).map(|i| (0..3).map(|k| a[i * 3 + k] * b[k]).sum()).collect();
        assert!((back[0] - 1.0).abs() < 1e-12 && (back[2] - 3.0).abs() < 1e-12);
    }

    #[test]
    fn blocked_cholesky_reconstructs_odd_sizes() {
        for n in [1, 63, 64, 65, 131] {
            // A = G G^T + n I with a deterministic G
            let g: Vec<f64> = (0..n * n).map(|k| ((k * 7919 % 113) as f64 / 113.0) - 0.5).collect();
            let mut a = vec![0.0; n * n];
            for i in 0..n {
                for j in 0..n {
                    a[i * n + j] = (0..n).map(|k| g[i * n + k] * g[j * n + k]).sum::<f64>();
                }
                a[i * n + i] += n as f64;
            }
            let l = cholesky(&a, n).unwrap();
            for i in 0..n {
                for j in 0..n {
                    let llt: f64 = (0..n).map(|k| l[i * n + k] * l[j * n + k]).sum();
                    assert!((llt - a[i * n + j]).abs() < 1e-9 * n as f64, "n={n} ({i},{j})");
                    if j > i {
                        assert_eq!(l[i * n + j], 0.0);
                    }
                }
            }
        }
    }
}
