//! Deterministic update streams.

use std::collections::VecDeque;

use anyhow::{bail, Context};
use dynspan::metric::parse_points;
use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::Serialize;

use crate::config::{Ops, Scenario, ScenarioConfig, DEFAULT_CUBE_PHI};

/// One step of a stream. `key` numbers points in order of creation; a point
/// deleted and later re-inserted at the same place gets a new key.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "op", rename_all = "lowercase")]
pub enum Event {
    Insert { key: usize, coords: Vec<f64> },
    Delete { key: usize },
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Stream {
    pub dim: usize,
    pub phi: f64,
    pub events: Vec<Event>,
}

impl Stream {
    /// Coordinates of every point in key order.
    pub fn points(&self) -> Vec<&[f64]> {
        self.events
            .iter()
            .filter_map(|e| match e {
                Event::Insert { coords, .. } => Some(coords.as_slice()),
                Event::Delete { .. } => None,
            })
            .collect()
    }

    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    /// Checks that every point set alive during the stream has minimum
    /// distance at least 1 and diameter at most `phi`, and that deletions
    /// name live points.
    pub fn check_bounded(&self) -> anyhow::Result<()> {
        let mut alive: Vec<(usize, &[f64])> = Vec::new();
        let mut next_key = 0;
        for (step, event) in self.events.iter().enumerate() {
            match event {
                Event::Insert { key, coords } => {
                    if *key != next_key {
                        bail!("step {step}: expected key {next_key}, got {key}");
                    }
                    next_key += 1;
                    if coords.len() != self.dim {
                        bail!("step {step}: point {key} has dimension {}", coords.len());
                    }
                    for &(other, c) in &alive {
                        let d = euclid(coords, c);
                        if d < 1.0 || d > self.phi {
                            bail!(
                                "step {step}: points {other} and {key} are at distance {d}, \
                                 outside [1, {}]",
                                self.phi
                            );
                        }
                    }
                    alive.push((*key, coords));
                }
                Event::Delete { key } => {
                    let Some(pos) = alive.iter().position(|(k, _)| k == key) else {
                        bail!("step {step}: delete of point {key}, which is not present");
                    };
                    alive.remove(pos);
                }
            }
        }
        Ok(())
    }
}

fn euclid(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// Smallest power of two that is at least `d` (and at least 1).
pub fn next_pow2(d: f64) -> f64 {
    let mut p = 1.0;
    while p < d {
        p *= 2.0;
    }
    p
}

type Sampler = Box<dyn FnMut(&mut ChaCha8Rng) -> Vec<f64>>;

enum Source {
    /// Unbounded supply drawn from a distribution.
    Sampled(Sampler),
    /// Fixed universe; fresh points are universe points not currently alive.
    Universe(Vec<Vec<f64>>),
}

struct Builder {
    rng: ChaCha8Rng,
    source: Source,
    attempts: usize,
    alive: Vec<(usize, Vec<f64>)>,
    /// Universe index of each live key, for `Source::Universe`.
    origin: Vec<Option<usize>>,
    events: Vec<Event>,
}

impl Builder {
    fn fresh(&mut self) -> anyhow::Result<Option<(Vec<f64>, Option<usize>)>> {
        match &mut self.source {
            Source::Sampled(sample) => {
                for _ in 0..self.attempts {
                    let p = sample(&mut self.rng);
                    if self.alive.iter().all(|(_, q)| euclid(&p, q) >= 1.0) {
                        return Ok(Some((p, None)));
                    }
                }
                bail!(
                    "no point at distance >= 1 from the {} present ones after {} draws; \
                     increase phi or lower n",
                    self.alive.len(),
                    self.attempts
                )
            }
            Source::Universe(points) => {
                let used: Vec<usize> = self
                    .alive
                    .iter()
                    .filter_map(|(k, _)| self.origin[*k])
                    .collect();
                let free: Vec<usize> = (0..points.len()).filter(|i| !used.contains(i)).collect();
                Ok(free
                    .choose(&mut self.rng)
                    .map(|&i| (points[i].clone(), Some(i))))
            }
        }
    }

    fn insert(&mut self, coords: Vec<f64>, origin: Option<usize>) {
        let key = self.origin.len();
        self.origin.push(origin);
        self.alive.push((key, coords.clone()));
        self.events.push(Event::Insert { key, coords });
    }

    fn delete_at(&mut self, pos: usize) {
        let (key, _) = self.alive.remove(pos);
        self.events.push(Event::Delete { key });
    }
}

/// Builds the update stream described by `cfg`. Equal configs give equal
/// streams.
pub fn generate(cfg: &ScenarioConfig) -> anyhow::Result<Stream> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let (dim, phi, source, initial) = match cfg.scenario {
        Scenario::UniformCube => {
            let phi = cfg.phi.unwrap_or(DEFAULT_CUBE_PHI);
            let side = phi / (cfg.dim as f64).sqrt();
            let dim = cfg.dim;
            let sample = move |rng: &mut ChaCha8Rng| -> Vec<f64> {
                (0..dim).map(|_| rng.random::<f64>() * side).collect()
            };
            (dim, phi, Source::Sampled(Box::new(sample)), cfg.n)
        }
        Scenario::Clustered => {
            let phi = cfg.phi.unwrap_or(DEFAULT_CUBE_PHI);
            let side = phi / (cfg.dim as f64).sqrt();
            let dim = cfg.dim;
            let k = ((cfg.n as f64).sqrt().ceil() as usize).max(1);
            let centers: Vec<Vec<f64>> = (0..k)
                .map(|_| (0..dim).map(|_| rng.random::<f64>() * side).collect())
                .collect();
            let sigma = side / (4.0 * (k as f64).powf(1.0 / dim as f64));
            let normal = Normal::new(0.0, sigma).context("cluster spread")?;
            let sample = move |rng: &mut ChaCha8Rng| -> Vec<f64> {
                let c = &centers[rng.random_range(0..centers.len())];
                c.iter()
                    .map(|&x| (x + normal.sample(rng)).clamp(0.0, side))
                    .collect()
            };
            (dim, phi, Source::Sampled(Box::new(sample)), cfg.n)
        }
        Scenario::Path => {
            let phi = match cfg.phi {
                Some(p) => p,
                None => next_pow2(cfg.n.saturating_sub(1) as f64),
            };
            let points = (1..=cfg.n).map(|x| vec![x as f64]).collect();
            (1, phi, Source::Universe(points), cfg.n)
        }
        Scenario::File => {
            let path = cfg.points.as_ref().expect("validated");
            let text = std::fs::read_to_string(path)
                .with_context(|| format!("reading {}", path.display()))?;
            let parsed = parse_points(&text).with_context(|| format!("parsing {}", path.display()))?;
            if parsed.is_empty() {
                let phi = cfg.phi.unwrap_or(1.0);
                return Ok(Stream { dim: cfg.dim, phi, events: Vec::new() });
            }
            let points: Vec<Vec<f64>> = parsed.into_iter().map(|(_, c)| c).collect();
            let dim = points[0].len();
            let phi = match cfg.phi {
                Some(p) => p,
                None => {
                    let mut diam: f64 = 0.0;
                    for (i, a) in points.iter().enumerate() {
                        for b in &points[i + 1..] {
                            diam = diam.max(euclid(a, b));
                        }
                    }
                    next_pow2(diam)
                }
            };
            let n = points.len();
            (dim, phi, Source::Universe(points), n)
        }
    };

    let mut b = Builder {
        rng,
        source,
        attempts: 1000 * initial.max(1),
        alive: Vec::new(),
        origin: Vec::new(),
        events: Vec::new(),
    };

    let initial_points: Option<Vec<Vec<f64>>> = match &b.source {
        Source::Universe(points) => Some(points.clone()),
        Source::Sampled(_) => None,
    };
    let mut window: VecDeque<usize> = VecDeque::new();
    for k in 0..initial {
        let (coords, origin) = match &initial_points {
            Some(points) => (points[k].clone(), Some(k)),
            None => b.fresh()?.expect("sampled sources never run dry"),
        };
        b.insert(coords, origin);
        if let Ops::Window(w) = cfg.ops {
            window.push_back(b.origin.len() - 1);
            if window.len() > w {
                let oldest = window.pop_front().unwrap();
                let pos = b.alive.iter().position(|(k, _)| *k == oldest).unwrap();
                b.delete_at(pos);
            }
        }
    }

    if let Ops::Mixed(p_delete) = cfg.ops {
        let updates = cfg.updates.unwrap_or(2 * initial);
        for _ in 0..updates {
            let want_delete = !b.alive.is_empty() && b.rng.random::<f64>() < p_delete;
            if !want_delete {
                if let Some((coords, origin)) = b.fresh()? {
                    b.insert(coords, origin);
                    continue;
                }
                if b.alive.is_empty() {
                    break;
                }
            }
            let pos = b.rng.random_range(0..b.alive.len());
            b.delete_at(pos);
        }
    }

    let stream = Stream { dim, phi, events: b.events };
    stream.check_bounded()?;
    Ok(stream)
}
