//! Invariant suites run by `threepass verify`.

use std::fmt;
use std::str::FromStr;

use crate::attack::{coset_structure_in, Enumeration};
use crate::error::{Error, Result};
use crate::group::{AbelianActionGroup, PermSet};
use crate::perm::{Perm, Point};
use crate::protocol::KeyDistribution;
use crate::statcheck::{self, SAMPLED_TRIALS, TV_THRESHOLD};

/// Above this many point evaluations, triple checks fall back to
/// triples whose last factor is a generator.
const TRIPLE_BUDGET: usize = 10_000_000;
/// Exhaustive `(k, g, h)` attack sweeps run up to this many sessions.
const EXHAUSTIVE_SESSIONS: u128 = 200_000;
const SAMPLED_SESSIONS: u64 = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    Axioms,
    Stabilizers,
    Regularity,
    Secrecy,
    All,
}

impl Suite {
    fn expand(self) -> Vec<Suite> {
        match self {
            Suite::All => vec![
                Suite::Axioms,
                Suite::Stabilizers,
                Suite::Regularity,
                Suite::Secrecy,
            ],
            s => vec![s],
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Suite::Axioms => "axioms",
            Suite::Stabilizers => "stabilizers",
            Suite::Regularity => "regularity",
            Suite::Secrecy => "secrecy",
            Suite::All => "all",
        }
    }
}

impl FromStr for Suite {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        Ok(match s {
            "axioms" => Suite::Axioms,
            "stabilizers" => Suite::Stabilizers,
            "regularity" => Suite::Regularity,
            "secrecy" => Suite::Secrecy,
            "all" => Suite::All,
            other => return Err(format!("unknown suite `{other}`")),
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Status {
    Pass,
    /// Carries a counterexample.
    Fail(String),
    Skipped(String),
}

#[derive(Debug, Clone)]
pub struct CheckOutcome {
    pub suite: &'static str,
    pub name: &'static str,
    pub status: Status,
    pub details: Vec<(String, String)>,
}

impl CheckOutcome {
    fn new(suite: Suite, name: &'static str, failure: Option<String>) -> Self {
        CheckOutcome {
            suite: suite.name(),
            name,
            status: failure.map_or(Status::Pass, Status::Fail),
            details: Vec::new(),
        }
    }

    fn with(mut self, key: &str, value: impl ToString) -> Self {
        self.details.push((key.to_string(), value.to_string()));
        self
    }

    pub fn passed(&self) -> bool {
        !matches!(self.status, Status::Fail(_))
    }
}

impl fmt::Display for CheckOutcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let status = match &self.status {
            Status::Pass => "PASS".to_string(),
            Status::Fail(why) => format!("FAIL ({why})"),
            Status::Skipped(why) => format!("SKIP ({why})"),
        };
        write!(f, "{}/{}: {}", self.suite, self.name, status)?;
        for (k, v) in &self.details {
            write!(f, " {k}={v}")?;
        }
        Ok(())
    }
}

/// Runs `suite` on `group`. Cap overflows surface as `Err(CapExceeded)`,
/// never as failed checks.
pub fn run_suite(
    group: &AbelianActionGroup,
    suite: Suite,
    cap: usize,
    seed: u64,
) -> Result<Vec<CheckOutcome>> {
    let mut out = Vec::new();
    for s in suite.expand() {
        match s {
            Suite::Axioms => out.extend(axioms(group, cap)?),
            Suite::Stabilizers => out.extend(stabilizers(group, cap)?),
            Suite::Regularity => out.extend(regularity(group, cap)?),
            Suite::Secrecy => out.extend(secrecy(group, cap, seed)?),
            Suite::All => unreachable!("expanded"),
        }
    }
    Ok(out)
}

fn first_failure<T>(items: impl IntoIterator<Item = T>, bad: impl Fn(&T) -> Option<String>) -> Option<String> {
    items.into_iter().find_map(|x| bad(&x))
}

fn axioms(group: &AbelianActionGroup, cap: usize) -> Result<Vec<CheckOutcome>> {
    let s = Suite::Axioms;
    let mut elements = group.enumerate_elements(cap)?;
    let all: Vec<Perm> = elements.iter().cloned().collect();
    let n = group.degree();
    let id = Perm::identity(n);
    let exhaustive_triples = all.len().pow(3).saturating_mul(n.max(1)) <= TRIPLE_BUDGET;
    let third: Vec<&Perm> = if exhaustive_triples {
        all.iter().collect()
    } else {
        group.generators().iter().chain(std::iter::once(&id)).collect()
    };

    let mut out = Vec::new();

    let generator_orders = first_failure(group.generators().iter().zip(group.orders()), |(g, &o)| {
        let mut p = (*g).clone();
        for t in 1..o {
            if p.is_identity() {
                return Some(format!("{g} has order {t}, recorded {o}"));
            }
            p = p.compose(g).ok()?;
        }
        (!p.is_identity()).then(|| format!("{g}^{o} is not the identity"))
    });
    out.push(CheckOutcome::new(s, "generator_orders", generator_orders));

    let identity = (!elements.contains(&id)).then(|| "identity not enumerated".to_string());
    out.push(CheckOutcome::new(s, "identity", identity).with("elements", all.len()));

    let inverses = first_failure(&all, |p| {
        let inv = p.inverse();
        let ok = p.compose(&inv).is_ok_and(|x| x.is_identity()) && elements.contains(&inv);
        (!ok).then(|| format!("inverse of {p}"))
    });
    out.push(CheckOutcome::new(s, "inverses", inverses));

    let closure = (!elements.verify_closure()).then(|| "product escapes the set".to_string());
    out.push(CheckOutcome::new(s, "closure", closure));

    let mut commutativity = None;
    'outer: for p in &all {
        for q in &all {
            if p.compose(q)? != q.compose(p)? {
                commutativity = Some(format!("{p} and {q}"));
                break 'outer;
            }
        }
    }
    out.push(CheckOutcome::new(s, "commutativity", commutativity));

    let mut associativity = None;
    let mut action = None;
    for p in &all {
        for q in &all {
            let pq = p.compose(q)?;
            for r in &third {
                if associativity.is_none() && pq.compose(r)? != p.compose(&q.compose(r)?)? {
                    associativity = Some(format!("({p} {q}) {r}"));
                }
            }
            if action.is_none() {
                for a in 0..n {
                    let direct = pq.apply(Point(a))?;
                    let stepwise = q.apply(p.apply(Point(a))?)?;
                    if direct != stepwise {
                        action = Some(format!("a={a} p={p} q={q}"));
                        break;
                    }
                }
            }
        }
    }
    let mode = if exhaustive_triples { "exhaustive" } else { "generators" };
    out.push(CheckOutcome::new(s, "associativity", associativity).with("third_factor", mode));
    let action_identity = first_failure(0..n, |&a| {
        (id.apply(Point(a)).ok() != Some(Point(a))).then(|| format!("a={a}"))
    });
    out.push(CheckOutcome::new(s, "action", action.or(action_identity)));

    Ok(out)
}

fn stabilizers(group: &AbelianActionGroup, cap: usize) -> Result<Vec<CheckOutcome>> {
    let s = Suite::Stabilizers;
    let n = group.degree();
    let en = Enumeration::new(group, cap)?;
    let stabs: Vec<PermSet> = (0..n).map(|a| en.senders(Point(a), Point(a))).collect();
    let kernel = group.kernel(cap)?;
    let mut out = Vec::new();

    let kernel_fail = (!kernel.realized.is_trivial())
        .then(|| format!("{} realized kernel elements", kernel.realized.len()));
    out.push(
        CheckOutcome::new(s, "kernel", kernel_fail)
            .with("realized_kernel", kernel.realized.len())
            .with("abstract_kernel", kernel.abstract_size),
    );

    let mut conjugation = None;
    for a in 0..n {
        let table = group.orbit(Point(a))?;
        for &x in table.orbit() {
            let r = group.realize(&table.transversal_word(x)?)?;
            let conj: PermSet = stabs[a]
                .iter()
                .map(|p| p.conjugate_by(r.realized()))
                .collect::<Result<_>>()?;
            if conj != stabs[x.0] {
                conjugation.get_or_insert(format!("a={a} x={x}"));
            }
        }
    }
    out.push(CheckOutcome::new(s, "stabilizer_conjugation", conjugation));

    if group.is_transitive() && n > 0 {
        let collapse = first_failure(0..n, |&x| {
            (stabs[x] != stabs[0]).then(|| format!("G_{x} differs from G_0"))
        })
        .or_else(|| (kernel.realized != stabs[0]).then(|| "kernel differs from G_0".to_string()));
        out.push(CheckOutcome::new(s, "kernel_equals_stabilizer", collapse));
    } else {
        let mut c = CheckOutcome::new(s, "kernel_equals_stabilizer", None);
        c.status = Status::Skipped("action is not transitive".into());
        out.push(c);
    }

    let mut coset = None;
    let mut pairs = 0;
    for a in 0..n {
        let table = group.orbit(Point(a))?;
        for &b in table.orbit() {
            pairs += 1;
            if coset.is_none() && !coset_structure_in(&en, group, Point(a), b)?.holds() {
                coset = Some(format!("a={a} b={b}"));
            }
        }
    }
    out.push(CheckOutcome::new(s, "coset_structure", coset).with("pairs", pairs));

    Ok(out)
}

fn regularity(group: &AbelianActionGroup, cap: usize) -> Result<Vec<CheckOutcome>> {
    let s = Suite::Regularity;
    let r = statcheck::regularity_scan(group, cap)?;
    let fail = if !r.constant_on_orbit {
        Some("sender counts vary within an orbit".to_string())
    } else if !r.order_identity_holds() {
        Some("M * |S| differs from the group order".to_string())
    } else {
        None
    };
    let mut c = CheckOutcome::new(s, "sender_counts", fail);
    c.details = r.key_values();
    Ok(vec![c])
}

fn secrecy(group: &AbelianActionGroup, cap: usize, seed: u64) -> Result<Vec<CheckOutcome>> {
    let s = Suite::Secrecy;
    let n = group.degree();
    let exact = statcheck::prefers_exact(group, cap);
    let mut out = Vec::new();

    if exact {
        let mut fail = None;
        for k in 0..n {
            let r = statcheck::ciphertext_distribution_exact(group, Point(k), cap)?;
            if !r.matches_reference_exactly() {
                fail.get_or_insert(format!("k={k} tv={:.6}", r.tv_distance));
            }
        }
        out.push(CheckOutcome::new(s, "ciphertext_uniform", fail).with("mode", "exact"));
    } else {
        let r = statcheck::ciphertext_distribution(group, Point(0), SAMPLED_TRIALS, seed)?;
        let fail = (r.tv_distance >= TV_THRESHOLD).then(|| format!("tv={:.6}", r.tv_distance));
        out.push(
            CheckOutcome::new(s, "ciphertext_uniform", fail)
                .with("mode", "sampled")
                .with("tv_distance", format!("{:.6}", r.tv_distance))
                .with("chi_square", format!("{:.3}", r.chi_square)),
        );
    }

    if !group.is_transitive() {
        let mut c = CheckOutcome::new(s, "posterior_equals_prior", None);
        c.status = Status::Skipped("action is not transitive".into());
        out.push(c);
    } else if exact {
        let mut skewed = vec![1u64; n];
        skewed[0] = n.saturating_sub(1).max(1) as u64;
        let mut fail = None;
        for dist in [KeyDistribution::Uniform, KeyDistribution::Weighted(skewed)] {
            let r = statcheck::posterior_secrecy_exact(group, &dist, cap)?;
            if !r.posterior_equals_prior() {
                fail.get_or_insert(format!("prior {}", r.prior.description));
            }
        }
        out.push(CheckOutcome::new(s, "posterior_equals_prior", fail).with("mode", "exact"));
    } else {
        let r = statcheck::posterior_secrecy(group, &KeyDistribution::Uniform, SAMPLED_TRIALS, seed)?;
        let mut c = CheckOutcome::new(s, "posterior_equals_prior", None);
        c.status = Status::Skipped(format!("sampled diagnostic max_tv={:.6}", r.max_tv));
        out.push(c);
    }

    let sessions = group
        .abstract_order()
        .and_then(|o| o.checked_mul(o))
        .and_then(|o| o.checked_mul(n as u128));
    let report = match sessions {
        Some(total) if total <= EXHAUSTIVE_SESSIONS => {
            statcheck::attack_collapse_exhaustive(group, cap)?
        }
        _ => statcheck::attack_collapse(group, &KeyDistribution::Uniform, SAMPLED_SESSIONS, seed)?,
    };
    let fail = (!report.is_total())
        .then(|| format!("{} of {} sessions resisted", report.sessions - report.successes, report.sessions));
    let mut c = CheckOutcome::new(s, "attack_recovers_every_key", fail);
    c.details = report.key_values();
    out.push(c);

    Ok(out)
}

/// Distinguishes "ran out of cap" from other errors for callers that
/// report them differently.
pub fn is_cap_error(e: &Error) -> bool {
    matches!(e, Error::CapExceeded(_))
}
