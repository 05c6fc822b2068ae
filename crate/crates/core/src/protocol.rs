//! The three-pass key transport: Alice sends `c1 = k∘g`, Bob answers
//! `c2 = c1∘h`, Alice strips her element with `c3 = c2∘g⁻¹`, and Bob
//! recovers `k = c3∘h⁻¹`. Correctness rests on `g` and `h` commuting.

use std::collections::VecDeque;
use std::fmt;
use std::str::FromStr;

use rand::Rng;

use crate::error::{Error, Result};
use crate::group::{AbelianActionGroup, GroupElement};
use crate::perm::Point;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Phase {
    Init,
    SentC1,
    SentC2,
    Done,
    Recovered,
}

/// How Alice picks the key to transport.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub enum KeyDistribution {
    #[default]
    Uniform,
    Fixed(Point),
    /// Integer weight per point; probability is weight over total.
    Weighted(Vec<u64>),
}

impl KeyDistribution {
    /// Integer weights over `[0, degree)`. Exact computations work with these.
    pub fn weights(&self, degree: usize) -> Vec<u64> {
        match self {
            KeyDistribution::Uniform => vec![1; degree],
            KeyDistribution::Fixed(k) => (0..degree).map(|i| u64::from(i == k.0)).collect(),
            KeyDistribution::Weighted(w) => {
                let mut w = w.clone();
                w.resize(degree, 0);
                w
            }
        }
    }

    pub fn probabilities(&self, degree: usize) -> Vec<f64> {
        let w = self.weights(degree);
        let total: u64 = w.iter().sum();
        w.iter().map(|&x| x as f64 / total as f64).collect()
    }

    pub fn sample<R: Rng + ?Sized>(&self, degree: usize, rng: &mut R) -> Point {
        match self {
            KeyDistribution::Uniform => Point(rng.random_range(0..degree)),
            KeyDistribution::Fixed(k) => *k,
            KeyDistribution::Weighted(_) => {
                let w = self.weights(degree);
                let total: u64 = w.iter().sum();
                let mut r = rng.random_range(0..total);
                for (i, &x) in w.iter().enumerate() {
                    if r < x {
                        return Point(i);
                    }
                    r -= x;
                }
                unreachable!("r < total")
            }
        }
    }
}

fn check_element(group: &AbelianActionGroup, e: &GroupElement) -> Result<()> {
    if e.exponents().len() != group.rank() {
        return Err(Error::ArityMismatch {
            expected: group.rank(),
            found: e.exponents().len(),
        });
    }
    if e.realized().degree() != group.degree() {
        return Err(Error::DegreeMismatch {
            expected: group.degree(),
            found: e.realized().degree(),
        });
    }
    Ok(())
}

/// Alice: owns the key `k` and her private element `g`.
#[derive(Debug, Clone)]
pub struct AliceState<'g> {
    group: &'g AbelianActionGroup,
    k: Point,
    g: GroupElement,
    phase: Phase,
}

impl<'g> AliceState<'g> {
    pub fn new(group: &'g AbelianActionGroup, k: Point, g: GroupElement) -> Result<Self> {
        group.check_point(k)?;
        check_element(group, &g)?;
        Ok(AliceState {
            group,
            k,
            g,
            phase: Phase::Init,
        })
    }

    pub fn phase(&self) -> Phase {
        self.phase
    }

    pub fn key(&self) -> Point {
        self.k
    }

    pub fn element(&self) -> &GroupElement {
        &self.g
    }

    /// First pass: `c1 = k∘g`.
    pub fn send_c1(&mut self) -> Result<Point> {
        if self.phase != Phase::Init {
            return Err(Error::PhaseViolation {
                operation: "send_c1",
                phase: self.phase,
            });
        }
        let c1 = self.g.realized().apply(self.k)?;
        self.phase = Phase::SentC1;
        Ok(c1)
    }

    /// Third pass: `c3 = c2∘g⁻¹`.
    pub fn receive_c2(&mut self, c2: Point) -> Result<Point> {
        if self.phase != Phase::SentC1 {
            return Err(Error::PhaseViolation {
                operation: "receive_c2",
                phase: self.phase,
            });
        }
        self.group.check_point(c2)?;
        let c3 = self.g.realized().inverse().apply(c2)?;
        self.phase = Phase::Done;
        Ok(c3)
    }
}

/// Bob: owns his private element `h`.
#[derive(Debug, Clone)]
pub struct BobState<'g> {
    group: &'g AbelianActionGroup,
    h: GroupElement,
    phase: Phase,
    recovered_k: Option<Point>,
}

impl<'g> BobState<'g> {
    pub fn new(group: &'g AbelianActionGroup, h: GroupElement) -> Result<Self> {
        check_element(group, &h)?;
        Ok(BobState {
            group,
            h,
            phase: Phase::Init,
            recovered_k: None,
        })
    }

    pub fn phase(&self) -> Phase {
        self.phase
    }

    pub fn element(&self) -> &GroupElement {
        &self.h
    }

    pub fn recovered_key(&self) -> Option<Point> {
        self.recovered_k
    }

    /// Second pass: `c2 = c1∘h`.
    pub fn receive_c1(&mut self, c1: Point) -> Result<Point> {
        if self.phase != Phase::Init {
            return Err(Error::PhaseViolation {
                operation: "receive_c1",
                phase: self.phase,
            });
        }
        self.group.check_point(c1)?;
        let c2 = self.h.realized().apply(c1)?;
        self.phase = Phase::SentC2;
        Ok(c2)
    }

    /// Recovery: `k = c3∘h⁻¹`.
    pub fn receive_c3(&mut self, c3: Point) -> Result<Point> {
        if self.phase != Phase::SentC2 {
            return Err(Error::PhaseViolation {
                operation: "receive_c3",
                phase: self.phase,
            });
        }
        self.group.check_point(c3)?;
        let k = self.h.realized().inverse().apply(c3)?;
        self.phase = Phase::Recovered;
        self.recovered_k = Some(k);
        Ok(k)
    }
}

/// Alice draws `k` and a uniform `g`, and emits `c1`.
pub fn alice_init<'g, R: Rng + ?Sized>(
    group: &'g AbelianActionGroup,
    key_dist: &KeyDistribution,
    rng: &mut R,
) -> Result<(AliceState<'g>, Point)> {
    let k = key_dist.sample(group.degree(), rng);
    let g = group.sample_uniform(rng);
    let mut alice = AliceState::new(group, k, g)?;
    let c1 = alice.send_c1()?;
    Ok((alice, c1))
}

/// Bob draws a uniform `h` and answers `c1` with `c2`.
pub fn bob_respond<'g, R: Rng + ?Sized>(
    group: &'g AbelianActionGroup,
    c1: Point,
    rng: &mut R,
) -> Result<(BobState<'g>, Point)> {
    let h = group.sample_uniform(rng);
    let mut bob = BobState::new(group, h)?;
    let c2 = bob.receive_c1(c1)?;
    Ok((bob, c2))
}

pub fn alice_finalize(state: &mut AliceState<'_>, c2: Point) -> Result<Point> {
    state.receive_c2(c2)
}

pub fn bob_recover(state: &mut BobState<'_>, c3: Point) -> Result<Point> {
    state.receive_c3(c3)
}

/// A message on the public channel.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Message {
    C1(Point),
    C2(Point),
    C3(Point),
}

/// A passive observer of the channel.
pub trait Tap {
    fn observe(&mut self, message: &Message);
}

/// In-process FIFO channel. Every sent message is copied to each tap.
#[derive(Default)]
pub struct Channel<'t> {
    queue: VecDeque<Message>,
    taps: Vec<&'t mut dyn Tap>,
}

impl<'t> Channel<'t> {
    pub fn new() -> Self {
        Channel {
            queue: VecDeque::new(),
            taps: Vec::new(),
        }
    }

    pub fn attach(&mut self, tap: &'t mut dyn Tap) {
        self.taps.push(tap);
    }

    pub fn send(&mut self, message: Message) {
        for tap in self.taps.iter_mut() {
            tap.observe(&message);
        }
        self.queue.push_back(message);
    }

    pub fn recv(&mut self) -> Option<Message> {
        self.queue.pop_front()
    }
}

/// Records the three passes of a session as seen on the wire.
#[derive(Debug, Clone, Default)]
pub struct TranscriptRecorder {
    c1: Option<Point>,
    c2: Option<Point>,
    c3: Option<Point>,
}

impl Tap for TranscriptRecorder {
    fn observe(&mut self, message: &Message) {
        match *message {
            Message::C1(p) => self.c1 = Some(p),
            Message::C2(p) => self.c2 = Some(p),
            Message::C3(p) => self.c3 = Some(p),
        }
    }
}

impl TranscriptRecorder {
    /// The transcript, once all three passes have been seen.
    pub fn transcript(&self, group_id: &str) -> Option<Transcript> {
        Some(Transcript {
            group_id: group_id.to_string(),
            c1: self.c1?,
            c2: self.c2?,
            c3: self.c3?,
        })
    }
}

/// The public view of one session.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Transcript {
    pub group_id: String,
    pub c1: Point,
    pub c2: Point,
    pub c3: Point,
}

impl Transcript {
    /// `<group-id> <c1> <c2> <c3>`, each point shifted by `offset`.
    pub fn to_line(&self, offset: usize) -> String {
        format!(
            "{} {} {} {}",
            self.group_id,
            self.c1.0 + offset,
            self.c2.0 + offset,
            self.c3.0 + offset
        )
    }

    /// Inverse of [`Self::to_line`]. Errors carry `line_no`.
    pub fn parse_line(line: &str, offset: usize, line_no: usize) -> Result<Transcript> {
        let err = |message: String| Error::Parse {
            line: line_no,
            message,
        };
        let tokens: Vec<&str> = line.split_whitespace().collect();
        let [id, c1, c2, c3] = tokens[..] else {
            return Err(err(format!(
                "expected `<group-id> <c1> <c2> <c3>`, found {} fields",
                tokens.len()
            )));
        };
        let point = |t: &str| -> Result<Point> {
            let v: usize = t.parse().map_err(|_| err(format!("bad point `{t}`")))?;
            v.checked_sub(offset)
                .map(Point)
                .ok_or_else(|| err(format!("point {v} is below label offset {offset}")))
        };
        Ok(Transcript {
            group_id: id.to_string(),
            c1: point(c1)?,
            c2: point(c2)?,
            c3: point(c3)?,
        })
    }
}

impl fmt::Display for Transcript {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_line(0))
    }
}

impl FromStr for Transcript {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Transcript::parse_line(s, 0, 1)
    }
}

/// Private values of one session. Kept apart from [`Transcript`].
#[derive(Debug, Clone)]
pub struct SessionSecrets {
    pub k: Point,
    pub g: GroupElement,
    pub h: GroupElement,
}

impl SessionSecrets {
    /// `<k> <g-exponents> <h-exponents>`, with `k` shifted by `offset`.
    pub fn to_line(&self, offset: usize) -> String {
        format!(
            "{} {} {}",
            self.k.0 + offset,
            self.g.exponent_string(),
            self.h.exponent_string()
        )
    }

    /// Reads the key column of a secrets line.
    pub fn parse_key(line: &str, offset: usize, line_no: usize) -> Result<Point> {
        let err = |message: String| Error::Parse {
            line: line_no,
            message,
        };
        let tok = line
            .split_whitespace()
            .next()
            .ok_or_else(|| err("empty secrets line".into()))?;
        let v: usize = tok.parse().map_err(|_| err(format!("bad key `{tok}`")))?;
        v.checked_sub(offset)
            .map(Point)
            .ok_or_else(|| err(format!("key {v} is below label offset {offset}")))
    }
}

/// Outcome of one honest run.
#[derive(Debug, Clone)]
pub struct Session {
    pub transcript: Transcript,
    pub secrets: SessionSecrets,
    pub recovered: Point,
}

/// Runs the three passes with the given secrets, copying each message to `taps`.
pub fn run_forced_session(
    group: &AbelianActionGroup,
    k: Point,
    g: GroupElement,
    h: GroupElement,
    taps: &mut [&mut dyn Tap],
) -> Result<Session> {
    let mut alice = AliceState::new(group, k, g.clone())?;
    let mut bob = BobState::new(group, h.clone())?;
    let mut recorder = TranscriptRecorder::default();
    let mut channel = Channel::new();
    channel.attach(&mut recorder);
    for tap in taps.iter_mut() {
        channel.attach(&mut **tap);
    }

    let mut recovered = None;
    channel.send(Message::C1(alice.send_c1()?));
    while let Some(msg) = channel.recv() {
        match msg {
            Message::C1(c1) => channel.send(Message::C2(bob.receive_c1(c1)?)),
            Message::C2(c2) => channel.send(Message::C3(alice.receive_c2(c2)?)),
            Message::C3(c3) => recovered = Some(bob.receive_c3(c3)?),
        }
    }
    drop(channel);

    let transcript = recorder
        .transcript(group.id())
        .expect("all three passes were sent");
    Ok(Session {
        transcript,
        secrets: SessionSecrets { k, g, h },
        recovered: recovered.expect("bob received c3"),
    })
}

/// Draws `k`, then `g`, then `h` from `rng` and runs a session.
pub fn run_session<R: Rng + ?Sized>(
    group: &AbelianActionGroup,
    key_dist: &KeyDistribution,
    rng: &mut R,
) -> Result<Session> {
    run_session_tapped(group, key_dist, rng, &mut [])
}

pub fn run_session_tapped<R: Rng + ?Sized>(
    group: &AbelianActionGroup,
    key_dist: &KeyDistribution,
    rng: &mut R,
    taps: &mut [&mut dyn Tap],
) -> Result<Session> {
    let k = key_dist.sample(group.degree(), rng);
    let g = group.sample_uniform(rng);
    let h = group.sample_uniform(rng);
    run_forced_session(group, k, g, h, taps)
}
