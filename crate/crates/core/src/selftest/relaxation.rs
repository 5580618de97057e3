//! Moment relaxation for the swap fidelity given the three CHSH values.

use alloc::collections::BTreeMap;
use alloc::string::ToString;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::SQRT_2;

use super::poly::{Poly, Word, BOB_SYMBOLS, CHARLIE_SYMBOLS};
use super::sdp::{inner_sparse, solve_lmi, LmiProblem, LmiSolution, SdpStatus, SolverOptions, SparseSym};
use super::swap::swap_objective;
use super::SelftestError;

/// Which swap fidelity is minimized.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum FidelityObjective {
    /// `(f_1 + f_2 + f_3)/3`.
    Average,
    /// `f_j` for `j` in `0..=3`; `f_0` is the bare Bell-state fidelity.
    Single(usize),
}

impl FidelityObjective {
    pub fn poly(self) -> Result<Poly, SelftestError> {
        match self {
            FidelityObjective::Average => {
                let mut p = Poly::zero();
                for j in 1..=3 {
                    p = p.add(&swap_objective(j, 1.0)?);
                }
                Ok(p.scale(1.0 / 3.0))
            }
            FidelityObjective::Single(j) => swap_objective(j, 1.0),
        }
    }
}

/// How the observed CHSH values constrain the relaxation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum ChshMode {
    #[default]
    Equality,
    /// Each line is at least its observed value.
    AtLeast,
}

/// Generating words of the moment matrix. The identity and all single
/// projectors are always included.
#[derive(Debug, Clone, PartialEq)]
pub struct BasisSpec {
    /// `B_i C_k`.
    pub bob_charlie: bool,
    /// `B_i B_k`, `i != k`.
    pub bob_pairs: bool,
    /// `C_i C_k`, `i != k`.
    pub charlie_pairs: bool,
    /// `C_i C_k C_l` without equal neighbours.
    pub charlie_triples: bool,
    /// Every word appearing in a swap kernel.
    pub kernel_words: bool,
    /// Bob letters multiplied with every Charlie word of length two.
    pub bob_with_charlie_pairs: Vec<u8>,
    pub extra: Vec<Word>,
}

impl Default for BasisSpec {
    fn default() -> Self {
        Self {
            bob_charlie: true,
            bob_pairs: true,
            charlie_pairs: true,
            charlie_triples: true,
            kernel_words: true,
            bob_with_charlie_pairs: Vec::new(),
            extra: Vec::new(),
        }
    }
}

impl BasisSpec {
    /// Identity, singles, and the products of two projectors of different
    /// parties only.
    pub fn minimal() -> Self {
        Self {
            bob_charlie: true,
            bob_pairs: false,
            charlie_pairs: false,
            charlie_triples: false,
            kernel_words: false,
            bob_with_charlie_pairs: Vec::new(),
            extra: Vec::new(),
        }
    }

    pub fn words(&self) -> Result<Vec<Word>, SelftestError> {
        let bobs = 1..=BOB_SYMBOLS;
        let charlies = 1..=CHARLIE_SYMBOLS;
        let mut out = vec![Word::identity()];
        out.extend(bobs.clone().map(Word::bob));
        out.extend(charlies.clone().map(Word::charlie));
        if self.bob_charlie {
            for i in bobs.clone() {
                out.extend(charlies.clone().map(|k| Word::new(&[i], &[k])));
            }
        }
        if self.bob_pairs {
            for i in bobs.clone() {
                out.extend(bobs.clone().filter(|&k| k != i).map(|k| Word::new(&[i, k], &[])));
            }
        }
        let charlie_pairs: Vec<[u8; 2]> =
            charlies.clone().flat_map(|i| charlies.clone().filter(move |&k| k != i).map(move |k| [i, k])).collect();
        if self.charlie_pairs {
            out.extend(charlie_pairs.iter().map(|p| Word::new(&[], p)));
        }
        if self.charlie_triples {
            for p in &charlie_pairs {
                out.extend(charlies.clone().filter(|&l| l != p[1]).map(|l| Word::new(&[], &[p[0], p[1], l])));
            }
        }
        if self.kernel_words {
            for j in 0..=3 {
                out.extend(super::swap::swap_kernel(j, 1.0)?.words().cloned());
            }
        }
        for &i in &self.bob_with_charlie_pairs {
            if !(1..=BOB_SYMBOLS).contains(&i) {
                return Err(SelftestError::Index(i as usize));
            }
            out.extend(charlie_pairs.iter().map(|p| Word::new(&[i], p)));
            out.extend(charlies.clone().map(|k| Word::new(&[i], &[k])));
        }
        out.extend(self.extra.iter().cloned());
        let mut seen = BTreeMap::new();
        out.retain(|w| seen.insert(w.clone(), ()).is_none());
        Ok(out)
    }
}

/// `E(y, z)` combinations of the three lines, in Bob and Charlie observables.
pub fn chsh_line_polys() -> [Poly; 3] {
    let e = |y: u8, z: u8| Poly::bob_observable(y).mul(&Poly::charlie_observable(z));
    let line = |terms: [(u8, u8, f64); 4]| {
        terms.iter().fold(Poly::zero(), |acc, &(y, z, s)| acc.add(&e(y, z).scale(s)))
    };
    [
        line([(1, 1, 1.0), (2, 1, 1.0), (1, 2, 1.0), (2, 2, -1.0)]),
        line([(3, 1, 1.0), (4, 1, 1.0), (3, 3, -1.0), (4, 3, 1.0)]),
        line([(5, 2, 1.0), (6, 2, 1.0), (5, 3, -1.0), (6, 3, 1.0)]),
    ]
}

/// Moment matrix `Gamma[a][b] = <S_a^dagger S_b>` indexed by moment keys.
#[derive(Debug, Clone)]
pub struct MomentRelaxation {
    pub basis: Vec<Word>,
    pub keys: Vec<Word>,
    key_index: BTreeMap<Word, usize>,
    /// Upper triangle `(a, b, key)`.
    entries: Vec<(usize, usize, usize)>,
}

type Affine = (f64, BTreeMap<usize, f64>);

impl MomentRelaxation {
    pub fn new(spec: &BasisSpec) -> Result<Self, SelftestError> {
        let basis = spec.words()?;
        let mut keys = Vec::new();
        let mut key_index = BTreeMap::new();
        let mut entries = Vec::new();
        for a in 0..basis.len() {
            let left = basis[a].adjoint();
            for b in a..basis.len() {
                let k = left.mul(&basis[b]).moment_key();
                let idx = *key_index.entry(k.clone()).or_insert_with(|| {
                    keys.push(k);
                    keys.len() - 1
                });
                entries.push((a, b, idx));
            }
        }
        Ok(Self { basis, keys, key_index, entries })
    }

    pub fn size(&self) -> usize {
        self.basis.len()
    }

    pub fn moment_count(&self) -> usize {
        self.keys.len()
    }

    pub fn key_of(&self, w: &Word) -> Option<usize> {
        self.key_index.get(&w.moment_key()).copied()
    }

    /// Linear functional of a polynomial over the moment keys.
    pub fn linear(&self, p: &Poly) -> Result<BTreeMap<usize, f64>, SelftestError> {
        let mut out = BTreeMap::new();
        for (w, c) in &p.terms {
            let k = self.key_of(w).ok_or_else(|| SelftestError::MissingMoment(w.to_string()))?;
            *out.entry(k).or_insert(0.0) += c;
        }
        Ok(out)
    }

    /// Dense row-major `Gamma` for a moment assignment.
    pub fn moment_matrix(&self, mut moment: impl FnMut(&Word) -> f64) -> Vec<f64> {
        let n = self.size();
        let values: Vec<f64> = self.keys.iter().map(&mut moment).collect();
        let mut g = vec![0.0; n * n];
        for &(a, b, k) in &self.entries {
            g[a * n + b] = values[k];
            g[b * n + a] = values[k];
        }
        g
    }

    /// Builds the matrix inequality. Equalities are eliminated, so each
    /// remaining variable is a moment of a projector word and lies in `[-1, 1]`.
    pub fn lmi(&self, chsh: [f64; 3], objective: &Poly, mode: ChshMode) -> Result<Reduced, SelftestError> {
        let identity = self.key_of(&Word::identity()).expect("identity is in the basis");
        // key -> affine form over the original key indices
        let mut forms: Vec<Affine> = (0..self.keys.len())
            .map(|k| {
                if k == identity {
                    (1.0, BTreeMap::new())
                } else {
                    (0.0, BTreeMap::from([(k, 1.0)]))
                }
            })
            .collect();
        let lines = chsh_line_polys();
        let mut inequalities = Vec::new();
        for (line, &value) in lines.iter().zip(&chsh) {
            let lin = self.linear(line)?;
            let (c0, coeffs) = compose(&forms, &lin);
            match mode {
                ChshMode::AtLeast => inequalities.push((c0 - value, coeffs)),
                ChshMode::Equality => {
                    let (&pivot, &pc) = coeffs
                        .iter()
                        .max_by(|a, b| a.1.abs().total_cmp(&b.1.abs()))
                        .ok_or(SelftestError::Infeasible)?;
                    // pivot = (value - c0 - sum_{others} c y) / pc
                    let mut sub: Affine = ((value - c0) / pc, BTreeMap::new());
                    for (&v, &c) in &coeffs {
                        if v != pivot {
                            sub.1.insert(v, -c / pc);
                        }
                    }
                    for form in forms.iter_mut() {
                        if let Some(c) = form.1.remove(&pivot) {
                            form.0 += c * sub.0;
                            for (&v, &s) in &sub.1 {
                                *form.1.entry(v).or_insert(0.0) += c * s;
                            }
                            form.1.retain(|_, x| x.abs() > 1e-15);
                        }
                    }
                }
            }
        }
        // renumber surviving variables
        let mut var_of = BTreeMap::new();
        for form in &forms {
            for &v in form.1.keys() {
                let next = var_of.len();
                var_of.entry(v).or_insert(next);
            }
        }
        let nvars = var_of.len();
        let n = self.size();
        let mut f0 = SparseSym::default();
        let mut f = vec![SparseSym::default(); nvars];
        for &(a, b, k) in &self.entries {
            let (c0, coeffs) = &forms[k];
            if *c0 != 0.0 {
                f0.push(0, a, b, *c0);
            }
            for (v, c) in coeffs {
                f[var_of[v]].push(0, a, b, *c);
            }
        }
        let mut blocks = vec![n];
        for (c0, coeffs) in &inequalities {
            let blk = blocks.len();
            blocks.push(1);
            f0.push(blk, 0, 0, *c0);
            for (v, c) in coeffs {
                f[var_of[v]].push(blk, 0, 0, *c);
            }
        }
        f0.compress();
        for m in f.iter_mut() {
            m.compress();
        }
        let (offset, coeffs) = compose(&forms, &self.linear(objective)?);
        let mut c = vec![0.0; nvars];
        for (v, x) in coeffs {
            c[var_of[&v]] += x;
        }
        let mut keys_of_var = vec![0; nvars];
        for (&k, &v) in &var_of {
            keys_of_var[v] = k;
        }
        Ok(Reduced { problem: LmiProblem { blocks, f0, f, c, offset }, forms, keys_of_var })
    }
}

fn compose(forms: &[Affine], lin: &BTreeMap<usize, f64>) -> Affine {
    let mut c0 = 0.0;
    let mut out = BTreeMap::new();
    for (&k, &c) in lin {
        c0 += c * forms[k].0;
        for (&v, &s) in &forms[k].1 {
            *out.entry(v).or_insert(0.0) += c * s;
        }
    }
    out.retain(|_, x: &mut f64| x.abs() > 1e-15);
    (c0, out)
}

/// Matrix inequality together with the map back to moments.
#[derive(Debug, Clone)]
pub struct Reduced {
    pub problem: LmiProblem,
    forms: Vec<Affine>,
    keys_of_var: Vec<usize>,
}

impl Reduced {
    /// All moments at the solver's `y`.
    pub fn moments(&self, y: &[f64]) -> Vec<f64> {
        let pos: BTreeMap<usize, usize> = self.keys_of_var.iter().enumerate().map(|(i, &k)| (k, i)).collect();
        self.forms
            .iter()
            .map(|(c0, coeffs)| c0 + coeffs.iter().map(|(k, c)| c * y[pos[k]]).sum::<f64>())
            .collect()
    }

    /// `offset - <F0, X> - sum_i |c_i - <F_i, X>|`, a valid lower bound for any
    /// PSD `X` because every free variable is bounded by one in magnitude.
    pub fn certified_bound(&self, x: &[Vec<f64>]) -> f64 {
        let p = &self.problem;
        let inner = |m: &SparseSym| inner_sparse(m, &p.blocks, x);
        let slack: f64 = p.f.iter().zip(&p.c).map(|(m, c)| (c - inner(m)).abs()).sum();
        p.offset - inner(&p.f0) - slack
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SelftestOptions {
    pub basis: BasisSpec,
    pub mode: ChshMode,
    pub solver: SolverOptions,
}

impl Default for SelftestOptions {
    fn default() -> Self {
        Self { basis: BasisSpec::default(), mode: ChshMode::Equality, solver: SolverOptions::default() }
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct FidelityBound {
    pub objective: FidelityObjective,
    pub chsh: [f64; 3],
    /// Certified lower bound on the objective.
    pub lower_bound: f64,
    /// Objective at the relaxation's optimizer; exceeds `lower_bound` by the solver gap.
    pub relaxation_value: f64,
    /// `f_1, f_2, f_3` at the optimizer.
    pub fidelities: [f64; 3],
    pub iterations: usize,
    pub basis_size: usize,
    pub moment_count: usize,
}

/// Certified lower bound on the swap fidelity from the observed CHSH values.
pub fn fidelity_lower_bound(
    chsh: [f64; 3],
    objective: FidelityObjective,
    opts: &SelftestOptions,
) -> Result<FidelityBound, SelftestError> {
    for (line, &value) in chsh.iter().enumerate() {
        if !value.is_finite() || value.abs() > 2.0 * SQRT_2 + 1e-12 {
            return Err(SelftestError::ChshOutOfRange { line: line + 1, value });
        }
    }
    if let FidelityObjective::Single(j) = objective {
        if j > 3 {
            return Err(SelftestError::Index(j));
        }
    }
    let relax = MomentRelaxation::new(&opts.basis)?;
    let reduced = relax.lmi(chsh, &objective.poly()?, opts.mode)?;
    let sol: LmiSolution = solve_lmi(&reduced.problem, &opts.solver);
    match sol.status {
        SdpStatus::Optimal => {}
        SdpStatus::Infeasible => return Err(SelftestError::Infeasible),
        s => return Err(SelftestError::Solver(s)),
    }
    let moments = reduced.moments(&sol.y);
    let mut fidelities = [0.0; 3];
    for (j, slot) in fidelities.iter_mut().enumerate() {
        let lin = relax.linear(&swap_objective(j + 1, 1.0)?)?;
        *slot = lin.iter().map(|(k, c)| c * moments[*k]).sum();
    }
    Ok(FidelityBound {
        objective,
        chsh,
        lower_bound: reduced.certified_bound(&sol.x).min(sol.value),
        relaxation_value: sol.value,
        fidelities,
        iterations: sol.iterations,
        basis_size: relax.size(),
        moment_count: relax.moment_count(),
    })
}
