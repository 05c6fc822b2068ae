//! Distributional checks: ciphertext uniformity, sender regularity,
//! single-pass secrecy, and how completely the full-transcript attack
//! collapses it.
//!
//! Exact modes enumerate every exponent vector and compare integer counts,
//! so equalities hold with zero tolerance. Sampled modes split trials into
//! fixed chunks, each with its own ChaCha stream derived from a master seed,
//! so results do not depend on the thread count.

use std::fmt::Write as _;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::attack::eve_recover_key;
use crate::error::Result;
use crate::group::AbelianActionGroup;
use crate::perm::Point;
use crate::protocol::{run_forced_session, run_session, KeyDistribution};

/// Exact mode is used when `|φ(G)| · degree` is at most this.
pub const EXACT_WORK_LIMIT: usize = 100_000;
/// Gate for sampled uniformity checks.
pub const TV_THRESHOLD: f64 = 0.05;
/// Trial count for sampled uniformity checks.
pub const SAMPLED_TRIALS: u64 = 100_000;

const CHUNK: u64 = 1 << 14;

fn chunk_rng(seed: u64, chunk: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(chunk);
    rng
}

/// Runs `trials` independent draws in parallel chunks and sums their counts.
fn parallel_counts<F>(trials: u64, seed: u64, width: usize, draw: F) -> Result<Vec<u64>>
where
    F: Fn(&mut ChaCha8Rng, &mut Vec<u64>) -> Result<()> + Sync,
{
    let chunks = trials.div_ceil(CHUNK);
    (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = chunk_rng(seed, c);
            let mut counts = vec![0u64; width];
            let n = CHUNK.min(trials - c * CHUNK);
            for _ in 0..n {
                draw(&mut rng, &mut counts)?;
            }
            Ok(counts)
        })
        .try_reduce(
            || vec![0u64; width],
            |mut a, b| {
                a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
                Ok(a)
            },
        )
}

/// Whether exhaustive enumeration is cheap enough for `group`.
pub fn prefers_exact(group: &AbelianActionGroup, cap: usize) -> bool {
    match group.enumerate_elements(cap.min(EXACT_WORK_LIMIT)) {
        Ok(set) => set.len().saturating_mul(group.degree().max(1)) <= EXACT_WORK_LIMIT,
        Err(_) => false,
    }
}

/// A reference distribution over points, as integer weights.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Reference {
    pub description: String,
    pub weights: Vec<u64>,
}

impl Reference {
    pub fn uniform_on(description: impl Into<String>, degree: usize, points: &[Point]) -> Self {
        let mut weights = vec![0; degree];
        for p in points {
            weights[p.0] = 1;
        }
        Reference {
            description: description.into(),
            weights,
        }
    }

    pub fn total(&self) -> u64 {
        self.weights.iter().sum()
    }

    pub fn probability(&self, p: Point) -> f64 {
        self.weights[p.0] as f64 / self.total() as f64
    }
}

#[derive(Debug, Clone)]
pub struct DistributionReport {
    pub label: String,
    /// Every point with a nonzero observed count or reference weight.
    pub support: Vec<(Point, u64)>,
    pub trials: u64,
    pub reference: Reference,
    pub tv_distance: f64,
    pub chi_square: f64,
    pub degrees_of_freedom: usize,
    /// Counts come from exhaustive enumeration rather than sampling.
    pub exact: bool,
}

impl DistributionReport {
    pub fn from_counts(
        label: impl Into<String>,
        counts: &[u64],
        reference: Reference,
        exact: bool,
    ) -> Self {
        let trials: u64 = counts.iter().sum();
        let ref_total = reference.total();
        let mut tv = 0.0;
        let mut chi = 0.0;
        let mut support = Vec::new();
        for (i, (&c, &w)) in counts.iter().zip(&reference.weights).enumerate() {
            if c == 0 && w == 0 {
                continue;
            }
            support.push((Point(i), c));
            let observed = c as f64 / trials as f64;
            let expected = w as f64 / ref_total as f64;
            tv += (observed - expected).abs();
            if w > 0 {
                let e = expected * trials as f64;
                chi += (c as f64 - e).powi(2) / e;
            } else {
                chi = f64::INFINITY;
            }
        }
        let ref_support = reference.weights.iter().filter(|&&w| w > 0).count();
        DistributionReport {
            label: label.into(),
            support,
            trials,
            tv_distance: tv / 2.0,
            chi_square: chi,
            degrees_of_freedom: ref_support.saturating_sub(1),
            reference,
            exact,
        }
    }

    /// `count / trials == weight / total` for every point, compared in integers.
    pub fn matches_reference_exactly(&self) -> bool {
        let total = self.reference.total() as u128;
        let trials = self.trials as u128;
        let mut observed = vec![0u64; self.reference.weights.len()];
        for &(p, c) in &self.support {
            observed[p.0] = c;
        }
        observed
            .iter()
            .zip(&self.reference.weights)
            .all(|(&c, &w)| c as u128 * total == w as u128 * trials)
    }

    pub fn key_values(&self) -> Vec<(String, String)> {
        let support: Vec<String> = self.support.iter().map(|(p, c)| format!("{p}:{c}")).collect();
        vec![
            ("label".into(), self.label.clone()),
            ("mode".into(), mode(self.exact).into()),
            ("trials".into(), self.trials.to_string()),
            ("reference".into(), self.reference.description.clone()),
            ("support".into(), support.join(",")),
            ("tv_distance".into(), format!("{:.6}", self.tv_distance)),
            ("chi_square".into(), format!("{:.6}", self.chi_square)),
            ("degrees_of_freedom".into(), self.degrees_of_freedom.to_string()),
            (
                "exact_match".into(),
                u8::from(self.matches_reference_exactly()).to_string(),
            ),
        ]
    }
}

fn mode(exact: bool) -> &'static str {
    if exact {
        "exact"
    } else {
        "sampled"
    }
}

/// `metric=value` lines under a `report=<name>` header.
pub fn render_block(name: &str, kv: &[(String, String)]) -> String {
    let mut out = format!("report={name}\n");
    for (k, v) in kv {
        let _ = writeln!(out, "{k}={v}");
    }
    out
}

/// The same pairs on a single line.
pub fn render_summary(name: &str, kv: &[(String, String)]) -> String {
    let mut out = format!("summary report={name}");
    for (k, v) in kv {
        if !v.contains(char::is_whitespace) {
            let _ = write!(out, " {k}={v}");
        }
    }
    out
}

/// Exact distribution of `c1 = k∘g` over every exponent vector `g`.
pub fn ciphertext_distribution_exact(
    group: &AbelianActionGroup,
    k: Point,
    cap: usize,
) -> Result<DistributionReport> {
    group.check_point(k)?;
    let mut counts = vec![0u64; group.degree()];
    for e in group.exponent_vectors(cap)? {
        let g = group.realize(&e)?;
        counts[g.realized().images()[k.0]] += 1;
    }
    let orbit = group.orbit(k)?;
    let reference = Reference::uniform_on(format!("uniform on orbit of {k}"), group.degree(), orbit.orbit());
    Ok(DistributionReport::from_counts(
        format!("ciphertext c1 for k={k}"),
        &counts,
        reference,
        true,
    ))
}

/// Sampled distribution of `c1 = k∘g` for uniform `g`.
pub fn ciphertext_distribution(
    group: &AbelianActionGroup,
    k: Point,
    trials: u64,
    seed: u64,
) -> Result<DistributionReport> {
    group.check_point(k)?;
    let counts = parallel_counts(trials, seed, group.degree(), |rng, counts| {
        let g = group.sample_uniform(rng);
        counts[g.realized().images()[k.0]] += 1;
        Ok(())
    })?;
    let orbit = group.orbit(k)?;
    let reference = Reference::uniform_on(format!("uniform on orbit of {k}"), group.degree(), orbit.orbit());
    Ok(DistributionReport::from_counts(
        format!("ciphertext c1 for k={k}"),
        &counts,
        reference,
        false,
    ))
}

/// Key distribution conditioned on each observed `c1`, against the prior.
#[derive(Debug, Clone)]
pub struct PosteriorReport {
    pub prior: Reference,
    /// One report per `c1` value that occurred.
    pub conditionals: Vec<(Point, DistributionReport)>,
    pub max_tv: f64,
    pub exact: bool,
}

impl PosteriorReport {
    pub fn posterior_equals_prior(&self) -> bool {
        self.conditionals
            .iter()
            .all(|(_, r)| r.matches_reference_exactly())
    }

    pub fn key_values(&self) -> Vec<(String, String)> {
        let worst = self
            .conditionals
            .iter()
            .find(|(_, r)| r.tv_distance > 0.0 && r.tv_distance == self.max_tv)
            .map(|(c, _)| c.to_string())
            .unwrap_or_else(|| "-".into());
        vec![
            ("mode".into(), mode(self.exact).into()),
            ("prior".into(), self.prior.description.clone()),
            ("observed_c1_values".into(), self.conditionals.len().to_string()),
            ("max_tv_distance".into(), format!("{:.6}", self.max_tv)),
            ("worst_c1".into(), worst),
            (
                "posterior_equals_prior".into(),
                u8::from(self.posterior_equals_prior()).to_string(),
            ),
        ]
    }
}

fn posterior_from_joint(joint: &[Vec<u64>], prior: &Reference, exact: bool) -> PosteriorReport {
    let degree = prior.weights.len();
    let mut conditionals = Vec::new();
    for c in 0..degree {
        let column: Vec<u64> = joint.iter().map(|row| row[c]).collect();
        if column.iter().all(|&x| x == 0) {
            continue;
        }
        let report = DistributionReport::from_counts(
            format!("k given c1={c}"),
            &column,
            prior.clone(),
            exact,
        );
        conditionals.push((Point(c), report));
    }
    let max_tv = conditionals
        .iter()
        .map(|(_, r)| r.tv_distance)
        .fold(0.0, f64::max);
    PosteriorReport {
        prior: prior.clone(),
        conditionals,
        max_tv,
        exact,
    }
}

fn prior_reference(key_dist: &KeyDistribution, degree: usize) -> Reference {
    let description = match key_dist {
        KeyDistribution::Uniform => "uniform".to_string(),
        KeyDistribution::Fixed(k) => format!("point mass at {k}"),
        KeyDistribution::Weighted(_) => "weighted".to_string(),
    };
    Reference {
        description,
        weights: key_dist.weights(degree),
    }
}

/// Exact `P(k | c1)`: joint weight of `(k, c1)` is `prior(k) · #{g : k∘g = c1}`.
pub fn posterior_secrecy_exact(
    group: &AbelianActionGroup,
    key_dist: &KeyDistribution,
    cap: usize,
) -> Result<PosteriorReport> {
    let n = group.degree();
    let prior = prior_reference(key_dist, n);
    let elements = group.abstract_elements(cap)?;
    let mut joint = vec![vec![0u64; n]; n];
    for (k, row) in joint.iter_mut().enumerate() {
        let w = prior.weights[k];
        if w == 0 {
            continue;
        }
        for g in &elements {
            row[g.realized().images()[k]] += w;
        }
    }
    Ok(posterior_from_joint(&joint, &prior, true))
}

/// Sampled `P(k | c1)` from `trials` first passes.
pub fn posterior_secrecy(
    group: &AbelianActionGroup,
    key_dist: &KeyDistribution,
    trials: u64,
    seed: u64,
) -> Result<PosteriorReport> {
    let n = group.degree();
    let prior = prior_reference(key_dist, n);
    let flat = parallel_counts(trials, seed, n * n, |rng, counts| {
        let k = key_dist.sample(n, rng);
        let g = group.sample_uniform(rng);
        counts[k.0 * n + g.realized().images()[k.0]] += 1;
        Ok(())
    })?;
    let joint: Vec<Vec<u64>> = flat.chunks(n.max(1)).map(<[u64]>::to_vec).collect();
    Ok(posterior_from_joint(&joint, &prior, false))
}

/// How often Eve recovers `k` from the full transcript.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CollapseReport {
    pub sessions: u64,
    pub successes: u64,
    pub exact: bool,
}

impl CollapseReport {
    pub fn success_rate(&self) -> f64 {
        if self.sessions == 0 {
            1.0
        } else {
            self.successes as f64 / self.sessions as f64
        }
    }

    pub fn is_total(&self) -> bool {
        self.successes == self.sessions
    }

    pub fn key_values(&self) -> Vec<(String, String)> {
        vec![
            ("mode".into(), mode(self.exact).into()),
            ("sessions".into(), self.sessions.to_string()),
            ("successes".into(), self.successes.to_string()),
            ("success_rate".into(), format!("{:.6}", self.success_rate())),
        ]
    }
}

/// Random honest sessions attacked from their transcripts.
pub fn attack_collapse(
    group: &AbelianActionGroup,
    key_dist: &KeyDistribution,
    sessions: u64,
    seed: u64,
) -> Result<CollapseReport> {
    let counts = parallel_counts(sessions, seed, 1, |rng, counts| {
        let s = run_session(group, key_dist, rng)?;
        let eve = eve_recover_key(group, &s.transcript)?;
        counts[0] += u64::from(eve.recovered_k == s.secrets.k);
        Ok(())
    })?;
    Ok(CollapseReport {
        sessions,
        successes: counts[0],
        exact: false,
    })
}

/// Every `(k, g, h)` triple over abstract elements, each attacked.
pub fn attack_collapse_exhaustive(group: &AbelianActionGroup, cap: usize) -> Result<CollapseReport> {
    let elements = group.abstract_elements(cap)?;
    let mut report = CollapseReport {
        sessions: 0,
        successes: 0,
        exact: true,
    };
    for k in 0..group.degree() {
        for g in &elements {
            for h in &elements {
                let s = run_forced_session(group, Point(k), g.clone(), h.clone(), &mut [])?;
                let eve = eve_recover_key(group, &s.transcript)?;
                report.sessions += 1;
                report.successes += u64::from(eve.recovered_k == Point(k));
            }
        }
    }
    Ok(report)
}

/// Sender counts `M(a, b)` for every pair of points.
#[derive(Debug, Clone)]
pub struct RegularityReport {
    pub degree: usize,
    /// `realized[a][b]`: realized permutations sending `a` to `b`.
    pub realized: Vec<Vec<u64>>,
    /// `abstract_counts[a][b]`: exponent vectors sending `a` to `b`.
    pub abstract_counts: Vec<Vec<u64>>,
    pub transitive: bool,
    /// Counts are positive and constant within every orbit, zero across orbits.
    pub constant_on_orbit: bool,
    /// The common realized count, when all same-orbit pairs share one.
    pub m_value: Option<u64>,
    pub abstract_m_value: Option<u64>,
    pub realized_order: usize,
    pub abstract_order: u128,
}

impl RegularityReport {
    /// `M · |S| = |φ(G)|` and `M_abstract · |S| = |G|`; only meaningful
    /// for transitive actions, vacuously true otherwise.
    pub fn order_identity_holds(&self) -> bool {
        if !self.transitive {
            return true;
        }
        match (self.m_value, self.abstract_m_value) {
            (Some(m), Some(am)) => {
                m as usize * self.degree == self.realized_order
                    && am as u128 * self.degree as u128 == self.abstract_order
            }
            _ => false,
        }
    }

    pub fn cross_orbit_zero_pairs(&self) -> usize {
        self.realized.iter().flatten().filter(|&&m| m == 0).count()
    }

    pub fn key_values(&self) -> Vec<(String, String)> {
        let opt = |v: Option<u64>| v.map_or_else(|| "-".to_string(), |m| m.to_string());
        vec![
            ("degree".into(), self.degree.to_string()),
            ("transitive".into(), u8::from(self.transitive).to_string()),
            ("constant_on_orbit".into(), u8::from(self.constant_on_orbit).to_string()),
            ("m_realized".into(), opt(self.m_value)),
            ("m_abstract".into(), opt(self.abstract_m_value)),
            ("realized_order".into(), self.realized_order.to_string()),
            ("abstract_order".into(), self.abstract_order.to_string()),
            ("zero_pairs".into(), self.cross_orbit_zero_pairs().to_string()),
            ("order_identity".into(), u8::from(self.order_identity_holds()).to_string()),
        ]
    }
}

fn orbit_labels(group: &AbelianActionGroup) -> Result<Vec<usize>> {
    let mut label = vec![usize::MAX; group.degree()];
    let mut next = 0;
    for a in 0..group.degree() {
        if label[a] != usize::MAX {
            continue;
        }
        for &p in group.orbit(Point(a))?.orbit() {
            label[p.0] = next;
        }
        next += 1;
    }
    Ok(label)
}

/// `(constant and positive within orbits, zero across, common value)`.
fn scan_counts(counts: &[Vec<u64>], orbit_of: &[usize]) -> (bool, Option<u64>) {
    let mut per_orbit = vec![None; orbit_of.len()];
    let mut ok = true;
    for (a, row) in counts.iter().enumerate() {
        for (b, &m) in row.iter().enumerate() {
            if orbit_of[a] != orbit_of[b] {
                ok &= m == 0;
                continue;
            }
            ok &= m > 0;
            match per_orbit[orbit_of[a]] {
                None => per_orbit[orbit_of[a]] = Some(m),
                Some(v) => ok &= v == m,
            }
        }
    }
    let values: Vec<u64> = per_orbit.into_iter().flatten().collect();
    let common = match values.split_first() {
        Some((&first, rest)) if ok && rest.iter().all(|&v| v == first) => Some(first),
        _ => None,
    };
    (ok, common)
}

pub fn regularity_scan(group: &AbelianActionGroup, cap: usize) -> Result<RegularityReport> {
    let n = group.degree();
    let elements = group.enumerate_elements(cap)?;
    let mut realized = vec![vec![0u64; n]; n];
    for p in &elements {
        for (a, &b) in p.images().iter().enumerate() {
            realized[a][b] += 1;
        }
    }
    let mut abstract_counts = vec![vec![0u64; n]; n];
    let mut abstract_order = 0u128;
    for e in group.exponent_vectors(cap)? {
        let g = group.realize(&e)?;
        for (a, &b) in g.realized().images().iter().enumerate() {
            abstract_counts[a][b] += 1;
        }
        abstract_order += 1;
    }
    let orbit_of = orbit_labels(group)?;
    let (constant_on_orbit, m_value) = scan_counts(&realized, &orbit_of);
    let (abstract_constant, abstract_m_value) = scan_counts(&abstract_counts, &orbit_of);
    Ok(RegularityReport {
        degree: n,
        transitive: group.is_transitive(),
        constant_on_orbit: constant_on_orbit && abstract_constant,
        m_value,
        abstract_m_value,
        realized_order: elements.len(),
        abstract_order,
        realized,
        abstract_counts,
    })
}

/// What guessing the private element costs, next to what the orbit attack costs.
#[derive(Debug, Clone, PartialEq)]
pub struct BruteForceCost {
    pub abstract_order: Option<u128>,
    /// `|φ(G)|`, when enumerable under the cap.
    pub realized_order: Option<usize>,
    /// `(|φ(G)| + 1) / 2` for uniform guessing without replacement.
    pub expected_guesses: Option<f64>,
    /// `degree · rank` generator images for the orbit attack.
    pub attack_generator_applications: usize,
}

impl BruteForceCost {
    pub fn key_values(&self) -> Vec<(String, String)> {
        let opt = |v: Option<String>| v.unwrap_or_else(|| "-".into());
        vec![
            ("abstract_order".into(), opt(self.abstract_order.map(|v| v.to_string()))),
            ("realized_order".into(), opt(self.realized_order.map(|v| v.to_string()))),
            (
                "expected_guesses".into(),
                opt(self.expected_guesses.map(|v| format!("{v:.1}"))),
            ),
            (
                "attack_generator_applications".into(),
                self.attack_generator_applications.to_string(),
            ),
        ]
    }
}

pub fn brute_force_cost(group: &AbelianActionGroup, cap: usize) -> BruteForceCost {
    let realized_order = group.enumerate_elements(cap).ok().map(|s| s.len());
    BruteForceCost {
        abstract_order: group.abstract_order(),
        realized_order,
        expected_guesses: realized_order.map(|n| (n as f64 + 1.0) / 2.0),
        attack_generator_applications: group.degree() * group.rank(),
    }
}
