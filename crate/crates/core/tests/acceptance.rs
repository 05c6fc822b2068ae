//! Acceptance gate. Runs every criterion, prints one line each, and exits
//! nonzero if any criterion fails or overruns its time budget.

use std::collections::BTreeMap;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use threepass_core::attack::{
    brute_force_senders, eve_recover_key, eve_recover_key_counted, verify_coset_structure,
};
use threepass_core::protocol::{run_forced_session, run_session, KeyDistribution};
use threepass_core::statcheck::{
    ciphertext_distribution, ciphertext_distribution_exact, posterior_secrecy_exact,
    regularity_scan,
};
use threepass_core::{zoo, AbelianActionGroup, GroupElement, Perm, Point, Transcript};

const CAP: usize = 10_000;
/// Work bound for criterion 10: at most this many point images per `n · m`.
const COST_CONSTANT: usize = 8;

type Outcome = Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        if !$cond {
            return Err(format!($($msg)+));
        }
    };
}

fn elements(g: &AbelianActionGroup) -> Vec<GroupElement> {
    g.abstract_elements(CAP).expect("enumerable")
}

fn points(g: &AbelianActionGroup) -> impl Iterator<Item = Point> {
    (0..g.degree()).map(Point)
}

fn klein_walkthrough() -> Outcome {
    let v = zoo::klein();
    let g = v.realize(&[1, 0]).unwrap();
    let h = v.realize(&[0, 1]).unwrap();
    ensure!(g.realized() == &zoo::klein_tau(1), "g is not tau1");
    ensure!(h.realized() == &zoo::klein_tau(2), "h is not tau2");
    // Label 3 is point 2.
    let s = run_forced_session(&v, Point(2), g, h, &mut []).map_err(|e| e.to_string())?;
    let shown = s.transcript.to_line(1);
    ensure!(shown == "klein 4 2 1", "transcript {shown}");
    ensure!(s.recovered == Point(2), "bob recovered {}", s.recovered.0 + 1);
    let eve = eve_recover_key(&v, &s.transcript).map_err(|e| e.to_string())?;
    ensure!(eve.recovered_k == Point(2), "eve recovered {}", eve.recovered_k.0 + 1);
    Ok("c1=4 c2=2 c3=1 bob=3 eve=3".into())
}

fn exhaustive_groups() -> Vec<(AbelianActionGroup, usize)> {
    vec![
        (zoo::klein(), 64),
        (zoo::cyclic(5), 125),
        (zoo::cyclic(12), 1728),
        (zoo::product_regular(&[2, 4]), 512),
    ]
}

/// Every `(k, g, h)` over abstract elements; returns `(triples, bob ok, eve ok)`.
fn sweep(g: &AbelianActionGroup) -> (usize, usize, usize) {
    let elems = elements(g);
    let (mut total, mut bob, mut eve) = (0, 0, 0);
    for k in points(g) {
        for a in &elems {
            for b in &elems {
                let s = run_forced_session(g, k, a.clone(), b.clone(), &mut []).unwrap();
                total += 1;
                bob += usize::from(s.recovered == k);
                let e = eve_recover_key(g, &s.transcript).unwrap();
                eve += usize::from(e.recovered_k == k);
            }
        }
    }
    (total, bob, eve)
}

fn protocol_correctness() -> Outcome {
    let mut parts = Vec::new();
    for (g, expected) in exhaustive_groups() {
        let (total, bob, _) = sweep(&g);
        ensure!(total == expected, "{}: {total} triples, expected {expected}", g.id());
        ensure!(bob == total, "{}: bob recovered {bob}/{total}", g.id());
        parts.push(format!("{}={bob}/{total}", g.id()));
    }
    Ok(parts.join(" "))
}

fn attack_totality() -> Outcome {
    let mut parts = Vec::new();
    let mut exhaustive = exhaustive_groups();
    exhaustive.push((zoo::two_orbit_cyclic(3), 6 * 3 * 3));
    for (g, expected) in exhaustive {
        let (total, _, eve) = sweep(&g);
        ensure!(total == expected, "{}: {total} triples", g.id());
        ensure!(eve == total, "{}: eve recovered {eve}/{total}", g.id());
        parts.push(format!("{}={eve}/{total}", g.id()));
    }
    for (g, seed) in [(zoo::cyclic(101), 101), (zoo::product_regular(&[2, 4, 9]), 72)] {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut eve = 0;
        for _ in 0..10_000 {
            let s = run_session(&g, &KeyDistribution::Uniform, &mut rng).unwrap();
            let e = eve_recover_key(&g, &s.transcript).unwrap();
            eve += usize::from(e.recovered_k == s.secrets.k);
        }
        ensure!(eve == 10_000, "{}: eve recovered {eve}/10000", g.id());
        parts.push(format!("{}={eve}/10000", g.id()));
    }
    Ok(parts.join(" "))
}

fn coset_structure() -> Outcome {
    let mut pairs = 0;
    for g in zoo::all() {
        let transitive = g.is_transitive();
        for a in points(&g) {
            let stab = g.stabilizer(a, CAP).unwrap();
            let orbit = g.orbit(a).unwrap();
            for b in points(&g) {
                let senders = brute_force_senders(&g, a, b, CAP).unwrap();
                if !orbit.contains(b) {
                    ensure!(senders.is_empty(), "{}: senders across orbits {a}->{b}", g.id());
                    continue;
                }
                pairs += 1;
                ensure!(
                    verify_coset_structure(&g, a, b, CAP).unwrap(),
                    "{}: coset check failed for {a}->{b}",
                    g.id()
                );
                for s1 in &senders {
                    for s2 in &senders {
                        let diff = s1.compose(&s2.inverse()).unwrap();
                        ensure!(stab.contains(&diff), "{}: {s1} / {s2} not in G_{a}", g.id());
                    }
                }
                if transitive {
                    ensure!(senders.len() == 1, "{}: {} sender perms {a}->{b}", g.id(), senders.len());
                }
            }
        }
    }
    Ok(format!("{pairs} in-orbit pairs over {} groups", zoo::all().len()))
}

fn kernel_and_stabilizers() -> Outcome {
    let mut checked = 0;
    for g in zoo::all() {
        let order = g.enumerate_elements(CAP).unwrap().len();
        ensure!(order <= 10_000, "{} too large", g.id());
        let stabs: Vec<_> = points(&g).map(|x| g.stabilizer(x, CAP).unwrap()).collect();
        if g.is_transitive() {
            let kernel = g.kernel(CAP).unwrap();
            for (x, s) in stabs.iter().enumerate() {
                ensure!(s == &kernel.realized, "{}: G_{x} differs from the kernel", g.id());
                let abstract_stab = g.stabilizer_abstract_size(Point(x), CAP).unwrap();
                ensure!(
                    abstract_stab == kernel.abstract_size,
                    "{}: abstract |G_{x}|={abstract_stab}, kernel {}",
                    g.id(),
                    kernel.abstract_size
                );
            }
        }
        for a in points(&g) {
            let table = g.orbit(a).unwrap();
            for &x in table.orbit() {
                let r = g.realize(&table.transversal_word(x).unwrap()).unwrap();
                ensure!(r.realized().apply(a).unwrap() == x, "{}: bad transversal", g.id());
                let conj: Vec<Perm> = stabs[a.0]
                    .iter()
                    .map(|p| p.conjugate_by(r.realized()).unwrap())
                    .collect();
                ensure!(
                    conj.len() == stabs[x.0].len() && conj.iter().all(|p| stabs[x.0].contains(p)),
                    "{}: r^-1 G_{a} r != G_{x}",
                    g.id()
                );
                checked += 1;
            }
        }
    }
    Ok(format!("{checked} (a, x) transversal pairs"))
}

fn property2_exact() -> Outcome {
    let mut parts = Vec::new();
    for g in [zoo::klein(), zoo::cyclic(12)] {
        let n = g.degree();
        for k in points(&g) {
            let r = ciphertext_distribution_exact(&g, k, CAP).unwrap();
            ensure!(r.matches_reference_exactly(), "{}: c1 not uniform for k={k}", g.id());
            ensure!(r.tv_distance == 0.0, "{}: tv {}", g.id(), r.tv_distance);
        }
        let mut skewed = vec![1u64; n];
        skewed[0] = n as u64 - 1;
        for prior in [KeyDistribution::Uniform, KeyDistribution::Weighted(skewed)] {
            let r = posterior_secrecy_exact(&g, &prior, CAP).unwrap();
            ensure!(r.posterior_equals_prior(), "{}: posterior differs from prior", g.id());
        }
        let reg = regularity_scan(&g, CAP).unwrap();
        let realized = g.enumerate_elements(CAP).unwrap().len();
        let m = reg.m_value.ok_or("M not constant")?;
        ensure!(m as usize * n == realized, "{}: M*|S|={} vs {realized}", g.id(), m as usize * n);
        for a in points(&g) {
            for b in points(&g) {
                let count = brute_force_senders(&g, a, b, CAP).unwrap().len() as u64;
                ensure!(count == m, "{}: M({a},{b})={count}", g.id());
            }
        }
        parts.push(format!("{}: M={m}", g.id()));
    }
    Ok(parts.join(" "))
}

fn property2_sampled() -> Outcome {
    let r = ciphertext_distribution(&zoo::cyclic(101), Point(7), 100_000, 0x7e57).unwrap();
    ensure!(r.trials == 100_000, "trials {}", r.trials);
    ensure!(r.tv_distance < 0.05, "tv {}", r.tv_distance);
    Ok(format!(
        "tv={:.5} chi2={:.1} dof={}",
        r.tv_distance, r.chi_square, r.degrees_of_freedom
    ))
}

/// `Π gen_i^e_i` by repeated composition, independent of `Perm::pow`.
fn naive_realize(g: &AbelianActionGroup, exps: &[u64]) -> Perm {
    let mut acc = Perm::identity(g.degree());
    for (gen, &e) in g.generators().iter().zip(exps) {
        for _ in 0..e {
            acc = acc.compose(gen).unwrap();
        }
    }
    acc
}

fn sampling_exactness() -> Outcome {
    let mut parts = Vec::new();
    for g in [zoo::klein(), zoo::nonfaithful_z2z2(), zoo::product_regular(&[2, 4])] {
        let mut counts: BTreeMap<Perm, u64> = BTreeMap::new();
        for e in g.exponent_vectors(CAP).unwrap() {
            let p = naive_realize(&g, &e);
            ensure!(&p == g.realize(&e).unwrap().realized(), "{}: realize({e:?})", g.id());
            *counts.entry(p).or_default() += 1;
        }
        let image = g.enumerate_elements(CAP).unwrap();
        ensure!(counts.len() == image.len(), "{}: pushforward misses elements", g.id());
        ensure!(counts.keys().all(|p| image.contains(p)), "{}: stray element", g.id());
        let first = *counts.values().next().unwrap();
        ensure!(counts.values().all(|&c| c == first), "{}: non-uniform pushforward", g.id());
        parts.push(format!("{}: {}x{}", g.id(), counts.len(), first));
    }
    Ok(parts.join(" "))
}

fn negative_control() -> Outcome {
    let g = zoo::s3_unchecked();
    let elems = elements(&g);
    let mut failures = 0;
    let mut witness = None;
    for k in points(&g) {
        for a in &elems {
            for b in &elems {
                let s = run_forced_session(&g, k, a.clone(), b.clone(), &mut []).unwrap();
                if s.recovered != k {
                    failures += 1;
                    witness.get_or_insert((k, a.realized().clone(), b.realized().clone()));
                }
            }
        }
    }
    let (k, a, b) = witness.ok_or("bob always recovered k over S3")?;
    Ok(format!("{failures} failing triples, e.g. k={k} g={a} h={b}"))
}

fn cost_contrast() -> Outcome {
    let mut parts = Vec::new();
    let mut n = 64;
    while n <= 4096 {
        let g = zoo::cyclic(n);
        let gen = g.realize(&[1]).unwrap();
        let back = g.realize(&[n as u64 - 1]).unwrap();
        let s = run_forced_session(&g, Point(0), gen, back, &mut []).unwrap();
        let (eve, cost) = eve_recover_key_counted(&g, &s.transcript).unwrap();
        ensure!(eve.recovered_k == Point(0), "cyclic {n}: wrong key");
        let bound = COST_CONSTANT * n * g.rank().max(1);
        ensure!(cost.total() <= bound, "cyclic {n}: {} > {bound}", cost.total());
        parts.push(format!(
            "n={n} |G|={} work={}",
            g.abstract_order().unwrap(),
            cost.total()
        ));
        n *= 2;
    }
    // A malformed transcript must not look like a cheap success.
    let g = zoo::two_orbit_cyclic(64);
    let t = Transcript { group_id: g.id().into(), c1: Point(0), c2: Point(64), c3: Point(0) };
    ensure!(eve_recover_key(&g, &t).is_err(), "cross-orbit transcript accepted");
    Ok(parts.join(", "))
}

struct Criterion {
    id: u32,
    name: &'static str,
    budget: Duration,
    run: fn() -> Outcome,
}

fn main() -> ExitCode {
    let criteria = [
        Criterion { id: 1, name: "klein walkthrough", budget: Duration::from_secs(1), run: klein_walkthrough },
        Criterion { id: 2, name: "protocol correctness (exhaustive)", budget: Duration::from_secs(5), run: protocol_correctness },
        Criterion { id: 3, name: "attack totality", budget: Duration::from_secs(30), run: attack_totality },
        Criterion { id: 4, name: "coset structure", budget: Duration::from_secs(10), run: coset_structure },
        Criterion { id: 5, name: "kernel and stabilizer theorems", budget: Duration::from_secs(10), run: kernel_and_stabilizers },
        Criterion { id: 6, name: "uniformity and secrecy (exact)", budget: Duration::from_secs(5), run: property2_exact },
        Criterion { id: 7, name: "uniformity (sampled)", budget: Duration::from_secs(10), run: property2_sampled },
        Criterion { id: 8, name: "sampling exactness", budget: Duration::from_secs(5), run: sampling_exactness },
        Criterion { id: 9, name: "non-Abelian negative control", budget: Duration::from_secs(1), run: negative_control },
        Criterion { id: 10, name: "attack cost linear in degree", budget: Duration::from_secs(10), run: cost_contrast },
    ];
    let mut failed = 0;
    for c in &criteria {
        let start = Instant::now();
        let outcome = (c.run)();
        let elapsed = start.elapsed();
        let verdict = match &outcome {
            Ok(_) if elapsed > c.budget => {
                Err(format!("over budget {:?}", c.budget))
            }
            Ok(detail) => Ok(detail.clone()),
            Err(e) => Err(e.clone()),
        };
        match verdict {
            Ok(detail) => println!(
                "criterion {:>2} {}: PASS [{:.3}s] {detail}",
                c.id,
                c.name,
                elapsed.as_secs_f64()
            ),
            Err(why) => {
                failed += 1;
                println!(
                    "criterion {:>2} {}: FAIL [{:.3}s] {why}",
                    c.id,
                    c.name,
                    elapsed.as_secs_f64()
                );
            }
        }
    }
    println!("acceptance: {} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
