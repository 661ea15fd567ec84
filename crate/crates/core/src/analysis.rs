//! Diagnostics over optimized controls: strategy labels, amplitude traces,
//! fidelity tables, heatmaps and a two-group clustering.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::controls::ControlSequence;
use crate::error::{Error, Result};
use crate::optimizer::{RunRecord, SweepResult};
use crate::potential::TweezerParams;
use crate::seeding::resample;

/// Fidelity regarded as a solved transfer.
pub const HIGH_FIDELITY: f64 = 0.999;
/// Width of the band around the atom position that is left unlabeled.
pub const DEFAULT_MARGIN: f64 = 0.02;
/// Value bins per channel in a heatmap.
pub const DEFAULT_BINS: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StrategyLabel {
    /// Stays short of the atom before returning.
    Yellow,
    /// Moves past the atom before returning.
    Blue,
    Undetermined,
}

/// Labels a trajectory by how far the tweezer travels. Amplitudes are ignored.
pub fn classify_strategy(controls: &ControlSequence, home: f64, atom_position: f64, margin: f64) -> StrategyLabel {
    let peak = controls.max_position();
    if peak > atom_position + margin {
        StrategyLabel::Blue
    } else if peak > home && peak <= atom_position - margin {
        StrategyLabel::Yellow
    } else {
        StrategyLabel::Undetermined
    }
}

/// `(iteration, mean amplitude)` for every iterate of a single run.
pub fn run_amplitude_trace(record: &RunRecord) -> Vec<(usize, f64)> {
    record.mean_amplitude_trace.iter().copied().enumerate().collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepAmplitudeTrace {
    /// `(duration, mean amplitude of the optimized controls)`, longest first.
    pub points: Vec<(f64, f64)>,
    /// Shortest duration whose best fidelity reached [`HIGH_FIDELITY`].
    pub last_high_fidelity_duration: Option<f64>,
}

pub fn sweep_amplitude_trace(result: &SweepResult) -> SweepAmplitudeTrace {
    SweepAmplitudeTrace {
        points: result
            .entries
            .iter()
            .map(|e| (e.duration, e.final_controls.mean_amplitude()))
            .collect(),
        last_high_fidelity_duration: result.shortest_duration_reaching(HIGH_FIDELITY),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FidelityRow {
    pub n_steps: usize,
    pub duration: f64,
    /// Best fidelity per sweep; `None` where the sweep never reached this duration.
    pub per_seed: Vec<Option<f64>>,
    pub best: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FidelityTable {
    pub n_seeds: usize,
    /// Longest duration first.
    pub rows: Vec<FidelityRow>,
}

impl FidelityTable {
    /// Tab separated, `NA` for missing entries.
    pub fn to_tsv(&self) -> String {
        let mut out = String::from("duration");
        for i in 0..self.n_seeds {
            let _ = write!(out, "\tseed{i}");
        }
        out.push_str("\tbest\n");
        let cell = |v: Option<f64>| v.map_or_else(|| "NA".to_string(), |f| f.to_string());
        for row in &self.rows {
            out.push_str(&row.duration.to_string());
            for v in &row.per_seed {
                out.push('\t');
                out.push_str(&cell(*v));
            }
            out.push('\t');
            out.push_str(&cell(row.best));
            out.push('\n');
        }
        out
    }
}

/// Aligns sweeps on their step counts.
pub fn fidelity_duration_table(results: &[SweepResult]) -> FidelityTable {
    let mut rows: BTreeMap<usize, FidelityRow> = BTreeMap::new();
    for (seed, result) in results.iter().enumerate() {
        for e in &result.entries {
            let row = rows.entry(e.n_steps).or_insert_with(|| FidelityRow {
                n_steps: e.n_steps,
                duration: e.duration,
                per_seed: vec![None; results.len()],
                best: None,
            });
            row.per_seed[seed] = Some(e.best_fidelity);
            row.best = Some(row.best.map_or(e.best_fidelity, |b: f64| b.max(e.best_fidelity)));
        }
    }
    FidelityTable {
        n_seeds: results.len(),
        rows: rows.into_values().rev().collect(),
    }
}

/// Per time step histograms of both channels; `counts[step][bin]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Heatmap {
    pub n_solutions: usize,
    pub n_steps: usize,
    pub bins: usize,
    pub position_range: (f64, f64),
    pub amplitude_range: (f64, f64),
    pub position_counts: Vec<Vec<u32>>,
    pub amplitude_counts: Vec<Vec<u32>>,
}

impl Heatmap {
    pub fn total_position_count(&self) -> u64 {
        self.position_counts.iter().flatten().map(|&c| u64::from(c)).sum()
    }

    pub fn total_amplitude_count(&self) -> u64 {
        self.amplitude_counts.iter().flatten().map(|&c| u64::from(c)).sum()
    }
}

fn bin_of(v: f64, (lo, hi): (f64, f64), bins: usize) -> usize {
    let u = ((v - lo) / (hi - lo) * bins as f64).floor();
    if u.is_nan() || u < 0.0 {
        0
    } else {
        (u as usize).min(bins - 1)
    }
}

/// Resamples every solution to `target_duration` and bins the values over
/// the control bounds.
pub fn heatmap(
    solutions: &[ControlSequence],
    target_duration: f64,
    dt: f64,
    bins: usize,
    bounds: &TweezerParams,
) -> Result<Heatmap> {
    if bins == 0 {
        return Err(Error::InvalidParameter("heatmap needs at least one bin".into()));
    }
    let n_steps = crate::controls::steps_for(target_duration, dt);
    let position_range = (bounds.position_min, bounds.position_max);
    let amplitude_range = (bounds.amplitude_min, bounds.amplitude_max);
    let mut position_counts = vec![vec![0u32; bins]; n_steps];
    let mut amplitude_counts = vec![vec![0u32; bins]; n_steps];
    for s in solutions {
        let r = resample(s, target_duration, dt)?;
        for (j, (&p, &a)) in r.positions.iter().zip(&r.amplitudes).enumerate() {
            position_counts[j][bin_of(p, position_range, bins)] += 1;
            amplitude_counts[j][bin_of(a, amplitude_range, bins)] += 1;
        }
    }
    Ok(Heatmap {
        n_solutions: solutions.len(),
        n_steps,
        bins,
        position_range,
        amplitude_range,
        position_counts,
        amplitude_counts,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterGroup {
    /// Indices into the input list, ascending.
    pub members: Vec<usize>,
    pub mean_positions: Vec<f64>,
    pub std_positions: Vec<f64>,
    pub mean_amplitudes: Vec<f64>,
    pub std_amplitudes: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Clustering {
    /// Group 0 grows from the lowest-peaked trajectory, group 1 from the highest.
    pub groups: [ClusterGroup; 2],
    /// Group index per input solution.
    pub labels: Vec<usize>,
    /// Set when a group ends up empty or both seeds coincide.
    pub degenerate: bool,
}

fn lexicographic(a: &ControlSequence, b: &ControlSequence) -> Ordering {
    a.positions
        .iter()
        .chain(&a.amplitudes)
        .zip(b.positions.iter().chain(&b.amplitudes))
        .map(|(x, y)| x.total_cmp(y))
        .find(|o| o.is_ne())
        .unwrap_or(Ordering::Equal)
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

fn mean_std(rows: &[&[f64]], len: usize) -> (Vec<f64>, Vec<f64>) {
    if rows.is_empty() {
        return (vec![], vec![]);
    }
    let n = rows.len() as f64;
    let mean: Vec<f64> = (0..len).map(|j| rows.iter().map(|r| r[j]).sum::<f64>() / n).collect();
    let std = (0..len)
        .map(|j| (rows.iter().map(|r| (r[j] - mean[j]).powi(2)).sum::<f64>() / n).sqrt())
        .collect();
    (mean, std)
}

const MAX_LLOYD_ITERATIONS: usize = 100;

/// Two-means on resampled position trajectories.
///
/// Inputs are put in a canonical content order first, so the result does not
/// depend on how the list was ordered; ties in the seeding rule and in the
/// assignment step go to the lower group.
pub fn cluster_two(solutions: &[ControlSequence], target_duration: f64, dt: f64) -> Result<Clustering> {
    if solutions.len() < 2 {
        return Err(Error::DegenerateState(format!(
            "clustering needs at least 2 solutions, got {}",
            solutions.len()
        )));
    }
    let resampled = solutions
        .iter()
        .map(|s| resample(s, target_duration, dt))
        .collect::<Result<Vec<_>>>()?;
    let mut order: Vec<usize> = (0..resampled.len()).collect();
    order.sort_by(|&i, &j| lexicographic(&resampled[i], &resampled[j]));

    let peak = |i: usize| resampled[i].max_position();
    let lo = order.iter().copied().fold(order[0], |m, i| if peak(i) < peak(m) { i } else { m });
    let hi = order.iter().copied().fold(order[0], |m, i| if peak(i) > peak(m) { i } else { m });
    let mut centroids = [resampled[lo].positions.clone(), resampled[hi].positions.clone()];
    let coincide = centroids[0] == centroids[1];

    let mut labels = vec![0usize; resampled.len()];
    for _ in 0..MAX_LLOYD_ITERATIONS {
        let mut changed = false;
        for &i in &order {
            let p = &resampled[i].positions;
            let g = usize::from(sq_dist(p, &centroids[1]) < sq_dist(p, &centroids[0]));
            changed |= labels[i] != g;
            labels[i] = g;
        }
        for (g, c) in centroids.iter_mut().enumerate() {
            let rows: Vec<&[f64]> = order
                .iter()
                .filter(|&&i| labels[i] == g)
                .map(|&i| resampled[i].positions.as_slice())
                .collect();
            if !rows.is_empty() {
                *c = mean_std(&rows, c.len()).0;
            }
        }
        if !changed {
            break;
        }
    }

    let n_steps = resampled[0].n_steps();
    let group = |g: usize| {
        let members: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] == g).collect();
        let pos: Vec<&[f64]> = members.iter().map(|&i| resampled[i].positions.as_slice()).collect();
        let amp: Vec<&[f64]> = members.iter().map(|&i| resampled[i].amplitudes.as_slice()).collect();
        let (mean_positions, std_positions) = mean_std(&pos, n_steps);
        let (mean_amplitudes, std_amplitudes) = mean_std(&amp, n_steps);
        ClusterGroup {
            members,
            mean_positions,
            std_positions,
            mean_amplitudes,
            std_amplitudes,
        }
    };
    let groups = [group(0), group(1)];
    let degenerate = coincide || groups.iter().any(|g| g.members.is_empty());
    Ok(Clustering {
        groups,
        labels,
        degenerate,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::optimizer::{SweepEntry, SweepTermination, Termination};

    const DT: f64 = 0.002;

    fn seq(positions: Vec<f64>, amplitudes: Vec<f64>) -> ControlSequence {
        let n = positions.len();
        ControlSequence::new(n as f64 * DT, DT, positions, amplitudes).unwrap()
    }

    fn peaked(peak: f64, amplitude: f64, n: usize) -> ControlSequence {
        let positions = (0..n)
            .map(|j| peak * (std::f64::consts::PI * j as f64 / (n - 1) as f64).sin())
            .collect();
        seq(positions, vec![amplitude; n])
    }

    #[test]
    fn strategy_thresholds() {
        assert_eq!(classify_strategy(&peaked(0.75, -50.0, 40), 0.0, 0.6, 0.02), StrategyLabel::Blue);
        assert_eq!(classify_strategy(&peaked(0.5, -50.0, 40), 0.0, 0.6, 0.02), StrategyLabel::Yellow);
        assert_eq!(classify_strategy(&peaked(0.6, -50.0, 41), 0.0, 0.6, 0.02), StrategyLabel::Undetermined);
        let still = seq(vec![0.0; 10], vec![-150.0; 10]);
        assert_eq!(classify_strategy(&still, 0.0, 0.6, 0.02), StrategyLabel::Undetermined);
    }

    #[test]
    fn strategy_ignores_amplitudes() {
        let a = peaked(0.7, -10.0, 30);
        let mut b = a.clone();
        b.amplitudes.iter_mut().for_each(|v| *v = -150.0);
        assert_eq!(classify_strategy(&a, 0.0, 0.6, 0.02), classify_strategy(&b, 0.0, 0.6, 0.02));
    }

    fn entry(n_steps: usize, fidelity: f64, amplitude: f64) -> SweepEntry {
        let c = seq(vec![0.0; n_steps], vec![amplitude; n_steps]);
        let record = RunRecord {
            fidelity_trace: vec![fidelity],
            mean_amplitude_trace: vec![amplitude],
            final_controls: c.clone(),
            iterations: 0,
            termination: Termination::BudgetExhausted,
        };
        SweepEntry {
            duration: n_steps as f64 * DT,
            n_steps,
            best_fidelity: fidelity,
            final_fidelity: fidelity,
            final_controls: c,
            record,
        }
    }

    fn sweep(entries: Vec<SweepEntry>, termination: SweepTermination) -> SweepResult {
        let termination_duration = entries.last().unwrap().duration;
        SweepResult {
            entries,
            termination,
            termination_duration,
        }
    }

    #[test]
    fn constant_amplitude_trace() {
        let r = sweep(
            vec![entry(10, 0.9995, -150.0), entry(8, 0.9991, -150.0), entry(6, 0.5, -150.0)],
            SweepTermination::Completed,
        );
        let t = sweep_amplitude_trace(&r);
        assert!(t.points.iter().all(|&(_, a)| a == -150.0));
        assert_eq!(t.last_high_fidelity_duration, Some(8.0 * DT));
        assert_eq!(run_amplitude_trace(&r.entries[0].record), vec![(0, -150.0)]);
    }

    #[test]
    fn single_sweep_table_matches_entries() {
        let r = sweep(vec![entry(10, 0.7, -1.0), entry(8, 0.6, -1.0)], SweepTermination::Completed);
        let t = fidelity_duration_table(std::slice::from_ref(&r));
        assert_eq!(t.rows.len(), 2);
        for (row, e) in t.rows.iter().zip(&r.entries) {
            assert_eq!(row.n_steps, e.n_steps);
            assert_eq!(row.per_seed, vec![Some(e.best_fidelity)]);
            assert_eq!(row.best, Some(e.best_fidelity));
        }
    }

    #[test]
    fn aborted_sweeps_leave_gaps_and_best_is_max() {
        let long = sweep(
            vec![entry(10, 0.7, -1.0), entry(8, 0.8, -1.0), entry(6, 0.3, -1.0)],
            SweepTermination::Completed,
        );
        let short = sweep(vec![entry(10, 0.9, -1.0), entry(8, 0.1, -1.0)], SweepTermination::Aborted);
        let t = fidelity_duration_table(&[long, short]);
        assert_eq!(t.rows[0].best, Some(0.9));
        assert_eq!(t.rows[1].best, Some(0.8));
        assert_eq!(t.rows[2].per_seed, vec![Some(0.3), None]);
        let tsv = t.to_tsv();
        assert!(tsv.starts_with("duration\tseed0\tseed1\tbest\n"));
        assert!(tsv.lines().last().unwrap().contains("NA"));
    }

    #[test]
    fn constant_solution_fills_one_bin_per_step() {
        let tw = TweezerParams::default();
        let h = heatmap(&[seq(vec![0.1; 100], vec![-75.0; 100])], 0.17, DT, DEFAULT_BINS, &tw).unwrap();
        assert_eq!(h.n_steps, 85);
        for counts in h.position_counts.iter().chain(&h.amplitude_counts) {
            assert_eq!(counts.iter().filter(|&&c| c > 0).count(), 1);
            assert_eq!(counts.iter().sum::<u32>(), 1);
        }
    }

    #[test]
    fn disjoint_solutions_fill_two_bins() {
        let tw = TweezerParams::default();
        let a = seq(vec![-0.4; 50], vec![-140.0; 50]);
        let b = seq(vec![0.8; 50], vec![-10.0; 50]);
        let h = heatmap(&[a, b], 0.17, DT, DEFAULT_BINS, &tw).unwrap();
        assert_eq!(h.total_position_count(), 2 * 85);
        assert!(h.position_counts.iter().all(|c| c.iter().filter(|&&v| v > 0).count() == 2));
        assert!(h.amplitude_counts.iter().all(|c| c.iter().filter(|&&v| v > 0).count() == 2));
    }

    #[test]
    fn bounds_land_in_edge_bins() {
        let tw = TweezerParams::default();
        let h = heatmap(
            &[seq(vec![tw.position_max; 4], vec![tw.amplitude_min; 4])],
            4.0 * DT,
            DT,
            8,
            &tw,
        )
        .unwrap();
        assert!(h.position_counts.iter().all(|c| c[7] == 1));
        assert!(h.amplitude_counts.iter().all(|c| c[0] == 1));
    }

    #[test]
    fn empty_heatmap() {
        let h = heatmap(&[], 0.17, DT, DEFAULT_BINS, &TweezerParams::default()).unwrap();
        assert_eq!(h.n_solutions, 0);
        assert_eq!(h.total_position_count(), 0);
    }

    #[test]
    fn clusters_split_by_peak() {
        let sols: Vec<_> = [0.3, 0.32, 0.35, 0.8, 0.82, 0.85]
            .iter()
            .map(|&p| peaked(p, -100.0, 60))
            .collect();
        let c = cluster_two(&sols, 0.1, DT).unwrap();
        assert!(!c.degenerate);
        assert_eq!(c.groups[0].members, vec![0, 1, 2]);
        assert_eq!(c.groups[1].members, vec![3, 4, 5]);
        assert_eq!(c.groups[0].mean_positions.len(), 50);
        assert!(c.groups[0].std_amplitudes.iter().all(|&s| s == 0.0));
    }

    #[test]
    fn duplicated_solutions_are_degenerate() {
        let s = peaked(0.5, -20.0, 30);
        let c = cluster_two(&[s.clone(), s.clone(), s], 0.06, DT).unwrap();
        assert!(c.degenerate);
        assert!(c.groups.iter().any(|g| g.members.is_empty()));
    }

    #[test]
    fn too_few_solutions() {
        assert!(matches!(
            cluster_two(&[peaked(0.5, -1.0, 10)], 0.02, DT),
            Err(Error::DegenerateState(_))
        ));
    }
}
