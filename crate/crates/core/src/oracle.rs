//! Exact transient law of the finite-state chain on tiny one-dimensional
//! lattices, by uniformization.
//!
//! Site `i` of an `n`-site chain carries the code `2 b + c` (background bit
//! `b`, infection bit `c`), and a state is `sum_i code_i 4^i`. For odd `n`
//! site `i` sits at coordinate `i - (n - 1) / 2`, which matches the
//! indexing of the closed box of half-width `(n - 1) / 2`.

use std::io::Write;

use serde::Serialize;

use crate::lattice::{Boundary, Params};
use crate::{Error, Result};

pub const MAX_SITES: usize = 4;
pub const DEFAULT_TOL: f64 = 1e-10;

/// Sparse generator of the chain: off-diagonal rates per row, plus the
/// diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneratorMatrix {
    pub params: Params,
    pub n_sites: usize,
    pub boundary: Boundary,
    pub rows: Vec<Vec<(usize, f64)>>,
    pub diagonal: Vec<f64>,
}

impl GeneratorMatrix {
    pub fn n_states(&self) -> usize {
        self.rows.len()
    }

    /// Rate of the transition `from -> to` (zero if absent).
    pub fn rate(&self, from: usize, to: usize) -> f64 {
        if from == to {
            return self.diagonal[from];
        }
        self.rows[from].iter().filter(|&&(j, _)| j == to).map(|&(_, r)| r).sum()
    }

    /// Row sum including the diagonal; zero up to rounding.
    pub fn row_sum(&self, state: usize) -> f64 {
        self.diagonal[state] + self.rows[state].iter().map(|&(_, r)| r).sum::<f64>()
    }
}

pub fn infected(state: usize, site: usize) -> bool {
    (state >> (2 * site)) & 1 == 1
}

pub fn background(state: usize, site: usize) -> bool {
    (state >> (2 * site + 1)) & 1 == 1
}

/// State index of the given bit vectors.
pub fn encode(background: &[bool], infected: &[bool]) -> usize {
    background
        .iter()
        .zip(infected)
        .enumerate()
        .map(|(i, (&b, &c))| ((2 * b as usize) + c as usize) << (2 * i))
        .sum()
}

fn neighbors(i: usize, n: usize, boundary: Boundary) -> Vec<usize> {
    let mut out = Vec::with_capacity(2);
    match boundary {
        Boundary::Closed => {
            if i + 1 < n {
                out.push(i + 1);
            }
            if i > 0 {
                out.push(i - 1);
            }
        }
        Boundary::Periodic => {
            out.push((i + 1) % n);
            out.push((i + n - 1) % n);
        }
    }
    out
}

/// Generator of the chain on `n_sites` sites in `d = 1`, straight from the
/// single-site rate table.
pub fn build_generator(params: &Params, n_sites: usize, boundary: Boundary) -> Result<GeneratorMatrix> {
    params.validate()?;
    if params.d != 1 {
        return Err(Error::InvalidArgument(format!("the exact chain is one-dimensional, got d = {}", params.d)));
    }
    if n_sites == 0 || n_sites > MAX_SITES {
        return Err(Error::InvalidArgument(format!("n_sites must be in 1..={MAX_SITES}, got {n_sites}")));
    }
    let n_states = 1 << (2 * n_sites);
    let Params { gamma, delta0, delta1, p, .. } = *params;
    let nbrs: Vec<Vec<usize>> = (0..n_sites).map(|i| neighbors(i, n_sites, boundary)).collect();
    let mut rows = Vec::with_capacity(n_states);
    let mut diagonal = Vec::with_capacity(n_states);
    for s in 0..n_states {
        let mut row = Vec::new();
        for x in 0..n_sites {
            let b = background(s, x);
            let c = infected(s, x);
            let cbit = 1 << (2 * x);
            let bbit = 1 << (2 * x + 1);
            if c {
                row.push((s ^ cbit, if b { delta1 } else { delta0 }));
            } else {
                let k = nbrs[x].iter().filter(|&&y| infected(s, y)).count();
                if k > 0 {
                    row.push((s ^ cbit, k as f64));
                }
            }
            row.push((s ^ bbit, if b { gamma * (1.0 - p) } else { gamma * p }));
        }
        row.retain(|&(_, r)| r > 0.0);
        diagonal.push(-row.iter().map(|&(_, r)| r).sum::<f64>());
        rows.push(row);
    }
    Ok(GeneratorMatrix { params: *params, n_sites, boundary, rows, diagonal })
}

fn check_distribution(gen: &GeneratorMatrix, dist: &[f64], tol: f64) -> Result<()> {
    if dist.len() != gen.n_states() {
        return Err(Error::InvalidArgument(format!(
            "distribution has {} entries, chain has {} states",
            dist.len(),
            gen.n_states()
        )));
    }
    if dist.iter().any(|&v| !(v >= 0.0)) || (dist.iter().sum::<f64>() - 1.0).abs() > tol.max(1e-12) {
        return Err(Error::InvalidArgument("initial vector is not a probability distribution".into()));
    }
    Ok(())
}

/// Law at time `t` from `initial`, neglecting less than `tol` of the mass.
///
/// Long times are split into steps with uniformized mean at most 64 so the
/// Poisson weights stay representable; the tolerance is shared equally.
pub fn transient_distribution(gen: &GeneratorMatrix, initial: &[f64], t: f64, tol: f64) -> Result<Vec<f64>> {
    if !(tol > 0.0) {
        return Err(Error::InvalidArgument(format!("tolerance must be positive, got {tol}")));
    }
    if !(t >= 0.0) || !t.is_finite() {
        return Err(Error::InvalidWindow(format!("time must be finite and nonnegative, got {t}")));
    }
    check_distribution(gen, initial, tol)?;
    let lambda = gen.diagonal.iter().fold(0.0f64, |m, &d| m.max(-d));
    if t == 0.0 || lambda == 0.0 {
        return Ok(initial.to_vec());
    }
    let steps = (lambda * t / 64.0).ceil().max(1.0);
    let dt = t / steps;
    let step_tol = tol / steps;
    let mut dist = initial.to_vec();
    for _ in 0..steps as usize {
        dist = uniformized_step(gen, &dist, lambda, dt, step_tol);
    }
    Ok(dist)
}

fn uniformized_step(gen: &GeneratorMatrix, dist: &[f64], lambda: f64, t: f64, tol: f64) -> Vec<f64> {
    let mean = lambda * t;
    let mut weight = (-mean).exp();
    let mut covered = weight;
    let mut term = dist.to_vec();
    let mut out: Vec<f64> = term.iter().map(|&v| v * weight).collect();
    let mut k = 0u32;
    while 1.0 - covered > tol {
        k += 1;
        term = kernel_apply(gen, &term, lambda);
        weight *= mean / k as f64;
        covered += weight;
        for (o, &v) in out.iter_mut().zip(&term) {
            *o += weight * v;
        }
        if k > 100_000 {
            break;
        }
    }
    out
}

/// One step of the uniformized kernel `I + Q / lambda`, applied to a row vector.
fn kernel_apply(gen: &GeneratorMatrix, v: &[f64], lambda: f64) -> Vec<f64> {
    let mut out: Vec<f64> = v.iter().zip(&gen.diagonal).map(|(&x, &d)| x * (1.0 + d / lambda)).collect();
    for (s, row) in gen.rows.iter().enumerate() {
        if v[s] == 0.0 {
            continue;
        }
        for &(j, r) in row {
            out[j] += v[s] * r / lambda;
        }
    }
    out
}

/// Mass at time `t` of the states satisfying `pred`.
pub fn exact_event_prob(
    gen: &GeneratorMatrix,
    initial: &[f64],
    t: f64,
    tol: f64,
    pred: impl Fn(usize) -> bool,
) -> Result<f64> {
    let dist = transient_distribution(gen, initial, t, tol)?;
    Ok(dist.iter().enumerate().filter(|&(s, _)| pred(s)).map(|(_, &m)| m).sum())
}

/// Point mass at the given configuration.
pub fn point_mass(gen: &GeneratorMatrix, background: &[bool], infected: &[bool]) -> Result<Vec<f64>> {
    if background.len() != gen.n_sites || infected.len() != gen.n_sites {
        return Err(Error::BoxMismatch(format!("configuration does not have {} sites", gen.n_sites)));
    }
    let mut dist = vec![0.0; gen.n_states()];
    dist[encode(background, infected)] = 1.0;
    Ok(dist)
}

/// i.i.d. Bernoulli(`q`) background with a deterministic infected set.
pub fn product_initial(gen: &GeneratorMatrix, q: f64, infected: &[bool]) -> Result<Vec<f64>> {
    if infected.len() != gen.n_sites || !(0.0..=1.0).contains(&q) {
        return Err(Error::InvalidArgument("bad product initial law".into()));
    }
    let n = gen.n_sites;
    let mut dist = vec![0.0; gen.n_states()];
    for bits in 0..1usize << n {
        let bg: Vec<bool> = (0..n).map(|i| bits >> i & 1 == 1).collect();
        let ones = bits.count_ones() as i32;
        dist[encode(&bg, infected)] = q.powi(ones) * (1.0 - q).powi(n as i32 - ones);
    }
    Ok(dist)
}

/// Named predicates, with stable identifiers for fixtures.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Predicate {
    Always,
    InfectedNonempty,
    InfectedEmpty,
    SiteInfected(usize),
    /// Infected set meets the given sites.
    Meets(Vec<usize>),
    BackgroundOne(usize),
}

impl Predicate {
    pub fn holds(&self, state: usize, n_sites: usize) -> bool {
        match self {
            Predicate::Always => true,
            Predicate::InfectedNonempty => (0..n_sites).any(|i| infected(state, i)),
            Predicate::InfectedEmpty => (0..n_sites).all(|i| !infected(state, i)),
            Predicate::SiteInfected(i) => infected(state, *i),
            Predicate::Meets(sites) => sites.iter().any(|&i| infected(state, i)),
            Predicate::BackgroundOne(i) => background(state, *i),
        }
    }

    pub fn id(&self) -> String {
        let list = |v: &[usize]| v.iter().map(|i| i.to_string()).collect::<Vec<_>>().join("+");
        match self {
            Predicate::Always => "always".into(),
            Predicate::InfectedNonempty => "nonempty".into(),
            Predicate::InfectedEmpty => "empty".into(),
            Predicate::SiteInfected(i) => format!("infected:{i}"),
            Predicate::Meets(v) => format!("meets:{}", list(v)),
            Predicate::BackgroundOne(i) => format!("background:{i}"),
        }
    }

    pub fn prob(&self, gen: &GeneratorMatrix, initial: &[f64], t: f64, tol: f64) -> Result<f64> {
        exact_event_prob(gen, initial, t, tol, |s| self.holds(s, gen.n_sites))
    }
}

/// One line of an oracle fixture file.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FixtureRow {
    pub d: usize,
    pub gamma: f64,
    pub delta0: f64,
    pub delta1: f64,
    pub p: f64,
    pub n_sites: usize,
    pub t: f64,
    pub predicate: String,
    pub probability: f64,
}

impl FixtureRow {
    pub fn new(gen: &GeneratorMatrix, t: f64, predicate: &Predicate, probability: f64) -> Self {
        let p = gen.params;
        FixtureRow {
            d: p.d,
            gamma: p.gamma,
            delta0: p.delta0,
            delta1: p.delta1,
            p: p.p,
            n_sites: gen.n_sites,
            t,
            predicate: predicate.id(),
            probability,
        }
    }
}

/// Writes fixture rows as CSV with a header line.
pub fn write_fixtures<W: Write>(rows: &[FixtureRow], w: W) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    for row in rows {
        out.serialize(row).map_err(std::io::Error::other)?;
    }
    out.flush()?;
    Ok(())
}
