//! `threepass`: run the three-pass protocol over public Abelian groups and
//! watch a passive eavesdropper recover every key.
//!
//! Exit codes: 0 when every check or recovery succeeds, 1 on a verification
//! or recovery failure, 2 on input or usage errors.

mod group_spec;

use std::fs::File;
use std::io::{self, BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use group_spec::GroupSpec;
use threepass_core::attack::{eve_recover_key, eve_recover_key_counted};
use threepass_core::protocol::{run_forced_session, run_session, KeyDistribution, SessionSecrets};
use threepass_core::statcheck::{self, render_block, render_summary};
use threepass_core::verify::{is_cap_error, run_suite, Suite};
use threepass_core::{zoo, Error, Perm, Point, Transcript, DEFAULT_CAP};

const FAILURE: u8 = 1;
const USAGE: u8 = 2;

#[derive(Parser)]
#[command(name = "threepass", version, about = "Three-pass key transport over public Abelian groups, and its passive attack")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Replay the Klein four-group walkthrough, then attack its transcript.
    DemoKlein {
        /// 1 shows points as {1,2,3,4}; 0 shows them 0-based.
        #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u8).range(0..=1))]
        labels: u8,
    },
    /// Run random sessions and print their public transcripts.
    Simulate {
        #[arg(long)]
        group: GroupSpec,
        #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..))]
        sessions: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 0, value_parser = clap::value_parser!(u8).range(0..=1))]
        labels: u8,
        /// Write each session's k, g and h to this file.
        #[arg(long, value_name = "PATH")]
        reveal_secrets: Option<PathBuf>,
    },
    /// Recover keys from transcripts (standard input unless --transcripts is given).
    Attack {
        #[arg(long)]
        group: GroupSpec,
        #[arg(long, value_name = "PATH")]
        transcripts: Option<PathBuf>,
        /// Secrets file from `simulate --reveal-secrets`, to score the attack.
        #[arg(long, value_name = "PATH")]
        secrets: Option<PathBuf>,
        #[arg(long, default_value_t = 0, value_parser = clap::value_parser!(u8).range(0..=1))]
        labels: u8,
    },
    /// Run invariant suites against a group.
    Verify {
        #[arg(long)]
        group: GroupSpec,
        #[arg(long, default_value = "all")]
        suite: Suite,
        #[arg(long, default_value_t = DEFAULT_CAP)]
        cap: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Print distribution, regularity and cost reports as metric=value blocks.
    Report {
        #[arg(long)]
        group: GroupSpec,
        /// Key whose ciphertext distribution is reported.
        #[arg(long, default_value_t = 0)]
        key: usize,
        #[arg(long, default_value_t = statcheck::SAMPLED_TRIALS)]
        trials: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = DEFAULT_CAP)]
        cap: usize,
        /// Also print a one-line summary after each block.
        #[arg(long)]
        summary: bool,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::DemoKlein { labels } => demo_klein(labels as usize),
        Command::Simulate {
            group,
            sessions,
            seed,
            labels,
            reveal_secrets,
        } => simulate(&group, sessions, seed, labels as usize, reveal_secrets.as_deref()),
        Command::Attack {
            group,
            transcripts,
            secrets,
            labels,
        } => attack(&group, transcripts.as_deref(), secrets.as_deref(), labels as usize),
        Command::Verify {
            group,
            suite,
            cap,
            seed,
        } => verify(&group, suite, cap, seed),
        Command::Report {
            group,
            key,
            trials,
            seed,
            cap,
            summary,
        } => report(&group, Point(key), trials, seed, cap, summary),
    };
    match result {
        Ok(code) => code,
        // Downstream closed the pipe (e.g. `| head`).
        Err(e)
            if e.downcast_ref::<std::io::Error>()
                .is_some_and(|io| io.kind() == std::io::ErrorKind::BrokenPipe) =>
        {
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(USAGE)
        }
    }
}

fn status(ok: bool) -> ExitCode {
    if ok {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(FAILURE)
    }
}

fn tau_name(p: &Perm) -> String {
    (0..4)
        .find(|&i| &zoo::klein_tau(i) == p)
        .map_or_else(|| p.to_string(), |i| format!("tau{i}"))
}

fn demo_klein(offset: usize) -> Result<ExitCode> {
    let v = zoo::klein();
    let g = v.realize(&[1, 0])?;
    let h = v.realize(&[0, 1])?;
    let k = Point(2);
    let show = |p: Point| p.0 + offset;

    let session = run_forced_session(&v, k, g.clone(), h.clone(), &mut [])?;
    let t = &session.transcript;
    let mut out = io::stdout().lock();
    writeln!(out, "group klein on points {}..{}", show(Point(0)), show(Point(3)))?;
    writeln!(out, "alice picks k={} g={}", show(k), tau_name(g.realized()))?;
    writeln!(out, "alice -> bob c1={}", show(t.c1))?;
    writeln!(out, "bob picks h={}", tau_name(h.realized()))?;
    writeln!(out, "bob -> alice c2={}", show(t.c2))?;
    writeln!(out, "alice -> bob c3={}", show(t.c3))?;
    writeln!(out, "bob recovers k={}", show(session.recovered))?;

    let (eve, cost) = eve_recover_key_counted(&v, t)?;
    writeln!(
        out,
        "eve observes c1={} c2={} c3={}",
        show(t.c1),
        show(t.c2),
        show(t.c3)
    )?;
    writeln!(
        out,
        "eve finds h'={} (exponents {}) with c1 -> c2",
        tau_name(eve.h_prime.realized()),
        eve.h_prime.exponent_string()
    )?;
    writeln!(out, "eve recovers k={}", show(eve.recovered_k))?;
    writeln!(out, "eve work={} point images", cost.total())?;
    Ok(status(session.recovered == k && eve.recovered_k == k))
}

fn simulate(
    spec: &GroupSpec,
    sessions: u64,
    seed: u64,
    offset: usize,
    reveal: Option<&Path>,
) -> Result<ExitCode> {
    let group = spec.load()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut secrets = match reveal {
        Some(path) => Some(
            File::create(path).with_context(|| format!("creating {}", path.display()))?,
        ),
        None => None,
    };
    let mut out = io::stdout().lock();
    let mut failures = 0u64;
    for _ in 0..sessions {
        let s = run_session(&group, &KeyDistribution::Uniform, &mut rng)?;
        writeln!(out, "{}", s.transcript.to_line(offset))?;
        if let Some(f) = secrets.as_mut() {
            writeln!(f, "{}", s.secrets.to_line(offset))?;
        }
        failures += u64::from(s.recovered != s.secrets.k);
    }
    if failures > 0 {
        eprintln!("{failures} of {sessions} sessions failed to recover the key");
    }
    Ok(status(failures == 0))
}

fn content_lines(reader: impl BufRead) -> Result<Vec<(usize, String)>> {
    let mut lines = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        let trimmed = line.trim();
        if !trimmed.is_empty() && !trimmed.starts_with('#') {
            lines.push((i + 1, trimmed.to_string()));
        }
    }
    Ok(lines)
}

fn attack(
    spec: &GroupSpec,
    transcripts: Option<&Path>,
    secrets: Option<&Path>,
    offset: usize,
) -> Result<ExitCode> {
    let group = spec.load()?;
    let lines = match transcripts {
        Some(path) => content_lines(BufReader::new(
            File::open(path).with_context(|| format!("opening {}", path.display()))?,
        ))?,
        None => content_lines(io::stdin().lock())?,
    };
    let keys = match secrets {
        Some(path) => {
            let file = File::open(path).with_context(|| format!("opening {}", path.display()))?;
            let keys = content_lines(BufReader::new(file))?
                .iter()
                .map(|(n, l)| SessionSecrets::parse_key(l, offset, *n))
                .collect::<Result<Vec<_>, _>>()?;
            if keys.len() != lines.len() {
                bail!(
                    "{} transcripts but {} secrets lines",
                    lines.len(),
                    keys.len()
                );
            }
            Some(keys)
        }
        None => None,
    };

    let mut out = io::stdout().lock();
    let (mut malformed, mut recovered, mut matches) = (0u64, 0u64, 0u64);
    for (idx, (line_no, line)) in lines.iter().enumerate() {
        let t = match Transcript::parse_line(line, offset, *line_no) {
            Ok(t) => t,
            Err(e) => {
                eprintln!("{e}");
                malformed += 1;
                continue;
            }
        };
        let eve = match eve_recover_key(&group, &t) {
            Ok(r) => r,
            Err(e @ Error::NotInOrbit { .. }) => {
                eprintln!("line {line_no}: {e}");
                continue;
            }
            Err(e) => {
                eprintln!("line {line_no}: {e}");
                malformed += 1;
                continue;
            }
        };
        recovered += 1;
        let verdict = match &keys {
            Some(keys) => {
                let hit = keys[idx] == eve.recovered_k;
                matches += u64::from(hit);
                u8::from(hit).to_string()
            }
            None => "-".to_string(),
        };
        writeln!(
            out,
            "{} {} {}",
            t.to_line(offset),
            eve.recovered_k.0 + offset,
            verdict
        )?;
    }

    let total = lines.len() as u64;
    if total > 0 {
        let successes = if keys.is_some() { matches } else { recovered };
        writeln!(
            out,
            "summary transcripts={total} recovered={recovered} matches={} success_ratio={:.6}",
            if keys.is_some() { matches.to_string() } else { "-".into() },
            successes as f64 / total as f64
        )?;
    }
    if malformed > 0 {
        return Ok(ExitCode::from(USAGE));
    }
    let ok = match keys {
        Some(_) => matches == total,
        None => recovered == total,
    };
    Ok(status(ok))
}

fn verify(spec: &GroupSpec, suite: Suite, cap: usize, seed: u64) -> Result<ExitCode> {
    let group = spec.load()?;
    let outcomes = match run_suite(&group, suite, cap, seed) {
        Ok(o) => o,
        Err(e) if is_cap_error(&e) => {
            eprintln!("cap exceeded: {e}; rerun with a larger --cap");
            return Ok(ExitCode::from(USAGE));
        }
        Err(e) => return Err(e.into()),
    };
    let mut out = io::stdout().lock();
    writeln!(out, "group {group}")?;
    writeln!(out, "transitive={}", u8::from(group.is_transitive()))?;
    for o in &outcomes {
        writeln!(out, "{o}")?;
    }
    let failed = outcomes.iter().filter(|o| !o.passed()).count();
    writeln!(
        out,
        "verify suite={} checks={} failed={failed}",
        suite.name(),
        outcomes.len()
    )?;
    Ok(status(failed == 0))
}

fn report(
    spec: &GroupSpec,
    key: Point,
    trials: u64,
    seed: u64,
    cap: usize,
    summary: bool,
) -> Result<ExitCode> {
    let group = spec.load()?;
    group.check_point(key)?;
    let exact = statcheck::prefers_exact(&group, cap);
    let mut blocks: Vec<(&str, Vec<(String, String)>)> = Vec::new();

    let mut header = vec![
        ("group".to_string(), group.id().to_string()),
        ("degree".to_string(), group.degree().to_string()),
        ("rank".to_string(), group.rank().to_string()),
        ("transitive".to_string(), u8::from(group.is_transitive()).to_string()),
    ];
    header.extend(statcheck::brute_force_cost(&group, cap).key_values());
    blocks.push(("brute_force_cost", header));

    if exact {
        blocks.push(("regularity", statcheck::regularity_scan(&group, cap)?.key_values()));
        let c = statcheck::ciphertext_distribution_exact(&group, key, cap)?;
        blocks.push(("ciphertext_distribution", c.key_values()));
        let p = statcheck::posterior_secrecy_exact(&group, &KeyDistribution::Uniform, cap)?;
        blocks.push(("posterior_secrecy", p.key_values()));
    } else {
        let c = statcheck::ciphertext_distribution(&group, key, trials, seed)?;
        blocks.push(("ciphertext_distribution", c.key_values()));
        let p = statcheck::posterior_secrecy(&group, &KeyDistribution::Uniform, trials, seed)?;
        blocks.push(("posterior_secrecy", p.key_values()));
    }
    let sessions = trials.min(10_000);
    let collapse = statcheck::attack_collapse(&group, &KeyDistribution::Uniform, sessions, seed)?;
    blocks.push(("attack_collapse", collapse.key_values()));

    let mut out = io::stdout().lock();
    for (i, (name, kv)) in blocks.iter().enumerate() {
        if i > 0 {
            writeln!(out)?;
        }
        write!(out, "{}", render_block(name, kv))?;
        if summary {
            writeln!(out, "{}", render_summary(name, kv))?;
        }
    }
    Ok(status(collapse.is_total()))
}
