//! Time traces of search observables on a logarithmic (plus optional
//! linear) flip schedule, and pointwise averaging across instances.

use std::collections::BTreeMap;
use std::io::{self, Write};

use thiserror::Error;

/// One sampled moment of a run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TracePoint {
    /// Accepted flips so far (the schedule axis).
    pub flips: u64,
    /// Proposals so far, accepted or not.
    pub proposals: u64,
    /// Unsatisfied clauses E.
    pub energy: u64,
    /// Variables in at least one unsatisfied clause, N_u.
    pub n_u: u64,
}

/// Where along the flip axis to sample: `points_per_decade` geometric
/// points per factor of ten (rounded to distinct integers, starting at
/// flips = 1), always including flips = 0, plus every multiple of
/// `linear_stride` if set.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TraceSchedule {
    pub points_per_decade: u32,
    pub linear_stride: Option<u64>,
}

impl Default for TraceSchedule {
    fn default() -> Self {
        TraceSchedule {
            points_per_decade: 20,
            linear_stride: None,
        }
    }
}

impl TraceSchedule {
    /// The i-th geometric sample value, round(10^(i / points_per_decade)).
    /// Saturates at u64::MAX once past the representable range.
    fn geometric(&self, i: u32) -> u64 {
        let x = 10f64.powf(f64::from(i) / f64::from(self.points_per_decade));
        x.round() as u64
    }
}

/// All schedule steps up to and including `max_flips`, sorted and distinct.
/// The first element is always 0.
pub fn schedule_steps(max_flips: u64, schedule: TraceSchedule) -> Vec<u64> {
    assert!(max_flips >= 1, "schedule_steps needs a bounded horizon");
    assert!(schedule.points_per_decade >= 1);
    let mut steps = std::collections::BTreeSet::new();
    steps.insert(0);
    let mut i = 0;
    loop {
        let v = schedule.geometric(i);
        if v > max_flips {
            break;
        }
        steps.insert(v);
        i += 1;
    }
    if let Some(stride) = schedule.linear_stride {
        assert!(stride >= 1);
        let mut j = stride;
        while j <= max_flips {
            steps.insert(j);
            match j.checked_add(stride) {
                Some(next) => j = next,
                None => break,
            }
        }
    }
    steps.into_iter().collect()
}

/// A completed run's points together with the schedule that produced them.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Trace {
    pub schedule: TraceSchedule,
    pub points: Vec<TracePoint>,
}

/// Collects points during one run. The run loop calls [`observe`] with the
/// current counters after initialization and after every accepted flip;
/// points are kept only at scheduled flip counts. [`record_terminal`]
/// appends the final state even off-schedule (suppressed if the last kept
/// point already has the same flip count).
///
/// The schedule is generated lazily, so unbounded runs need no horizon.
///
/// [`observe`]: TraceRecorder::observe
/// [`record_terminal`]: TraceRecorder::record_terminal
#[derive(Debug, Clone)]
pub struct TraceRecorder {
    schedule: TraceSchedule,
    points: Vec<TracePoint>,
    geom_index: u32,
    next_geometric: u64,
    next_linear: u64,
    next_due: u64,
}

impl TraceRecorder {
    pub fn new(schedule: TraceSchedule) -> Self {
        assert!(schedule.points_per_decade >= 1);
        if let Some(stride) = schedule.linear_stride {
            assert!(stride >= 1);
        }
        TraceRecorder {
            schedule,
            points: Vec::new(),
            geom_index: 0,
            next_geometric: schedule.geometric(0),
            next_linear: schedule.linear_stride.unwrap_or(u64::MAX),
            next_due: 0,
        }
    }

    /// Keeps the observation if `flips` has reached the next scheduled step.
    #[inline]
    pub fn observe(&mut self, flips: u64, proposals: u64, energy: usize, n_u: usize) {
        if flips < self.next_due {
            return;
        }
        self.points.push(TracePoint {
            flips,
            proposals,
            energy: energy as u64,
            n_u: n_u as u64,
        });
        self.advance_past(flips);
    }

    /// Moves every schedule stream strictly beyond `flips`.
    fn advance_past(&mut self, flips: u64) {
        while self.next_geometric <= flips {
            self.geom_index += 1;
            self.next_geometric = self.schedule.geometric(self.geom_index);
        }
        while self.next_linear <= flips {
            self.next_linear = self
                .next_linear
                .saturating_add(self.schedule.linear_stride.unwrap_or(u64::MAX));
        }
        self.next_due = self.next_geometric.min(self.next_linear);
    }

    /// Appends the run's final state unless the last kept point already
    /// covers this flip count.
    pub fn record_terminal(&mut self, flips: u64, proposals: u64, energy: usize, n_u: usize) {
        if self.points.last().is_some_and(|p| p.flips == flips) {
            return;
        }
        self.points.push(TracePoint {
            flips,
            proposals,
            energy: energy as u64,
            n_u: n_u as u64,
        });
        self.advance_past(flips);
    }

    pub fn points(&self) -> &[TracePoint] {
        &self.points
    }

    pub fn into_trace(self) -> Trace {
        Trace {
            schedule: self.schedule,
            points: self.points,
        }
    }
}

/// One row of an across-instance average.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AveragedPoint {
    pub flips: u64,
    /// Instances contributing at this step (those with energy >= 1 here).
    pub count: usize,
    pub mean_energy: f64,
    pub mean_n_u: f64,
    /// Mean over instances of the per-instance ratio N_u / E.
    pub mean_ratio: f64,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum TraceError {
    #[error("traces were recorded under different schedules")]
    MismatchedSchedules,
}

/// Pointwise average across traces recorded under one common schedule.
///
/// An instance contributes to a step only while unsolved there (its point
/// exists and has energy >= 1): solved instances drop out of later steps
/// rather than padding the mean with zeros, and the per-step `count` column
/// records how many remain. The ratio is the mean of per-instance ratios.
/// Steps with no contributors are omitted.
pub fn average_traces(traces: &[Trace]) -> Result<Vec<AveragedPoint>, TraceError> {
    if let Some(first) = traces.first() {
        if traces.iter().any(|t| t.schedule != first.schedule) {
            return Err(TraceError::MismatchedSchedules);
        }
    }
    struct Acc {
        count: usize,
        energy: f64,
        n_u: f64,
        ratio: f64,
    }
    let mut by_step: BTreeMap<u64, Acc> = BTreeMap::new();
    for trace in traces {
        for p in &trace.points {
            if p.energy == 0 {
                continue;
            }
            let acc = by_step.entry(p.flips).or_insert(Acc {
                count: 0,
                energy: 0.0,
                n_u: 0.0,
                ratio: 0.0,
            });
            acc.count += 1;
            acc.energy += p.energy as f64;
            acc.n_u += p.n_u as f64;
            acc.ratio += p.n_u as f64 / p.energy as f64;
        }
    }
    Ok(by_step
        .into_iter()
        .map(|(flips, acc)| {
            let n = acc.count as f64;
            AveragedPoint {
                flips,
                count: acc.count,
                mean_energy: acc.energy / n,
                mean_n_u: acc.n_u / n,
                mean_ratio: acc.ratio / n,
            }
        })
        .collect())
}

/// Writes one run's points as CSV (`flips,proposals,energy,n_u`), after
/// any `# `-prefixed comment lines.
pub fn write_trace_csv<W: Write>(
    w: &mut W,
    comments: &[String],
    points: &[TracePoint],
) -> io::Result<()> {
    for line in comments {
        writeln!(w, "# {line}")?;
    }
    writeln!(w, "flips,proposals,energy,n_u")?;
    for p in points {
        writeln!(w, "{},{},{},{}", p.flips, p.proposals, p.energy, p.n_u)?;
    }
    Ok(())
}

/// Writes an across-instance average as CSV
/// (`flips,count,mean_energy,mean_n_u,mean_ratio`).
pub fn write_averaged_csv<W: Write>(
    w: &mut W,
    comments: &[String],
    rows: &[AveragedPoint],
) -> io::Result<()> {
    for line in comments {
        writeln!(w, "# {line}")?;
    }
    writeln!(w, "flips,count,mean_energy,mean_n_u,mean_ratio")?;
    for r in rows {
        writeln!(
            w,
            "{},{},{},{},{}",
            r.flips, r.count, r.mean_energy, r.mean_n_u, r.mean_ratio
        )?;
    }
    Ok(())
}
