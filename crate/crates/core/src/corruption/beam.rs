use super::{sample_sorted, CorruptedFrame, Frame, STREAM_SELECT};
use crate::error::{Error, Result};
use crate::geometry::BeamPartition;
use crate::rng::CounterRng;

fn check_partition(frame: &Frame, partition: &BeamPartition) -> Result<()> {
    frame.check_aligned()?;
    if partition.beam_of.len() != frame.cloud.len() {
        return Err(Error::LengthMismatch {
            expected: frame.cloud.len(),
            actual: partition.beam_of.len(),
        });
    }
    Ok(())
}

/// Drops every point on `m` beams drawn uniformly without replacement.
pub fn apply_beam_missing(frame: &Frame, partition: &BeamPartition, m: u32, seed: u64) -> Result<CorruptedFrame> {
    check_partition(frame, partition)?;
    if m > partition.beam_count {
        return Err(Error::Precondition(format!(
            "cannot drop {m} of {} beams",
            partition.beam_count
        )));
    }
    if m == 0 {
        return Ok(CorruptedFrame::unchanged(frame));
    }
    let mut rng = CounterRng::new(seed).stream(STREAM_SELECT);
    let mut dropped = vec![false; partition.beam_count as usize];
    for b in sample_sorted(&mut rng, partition.beam_count as usize, m as usize) {
        dropped[b] = true;
    }
    let keep: Vec<usize> = partition
        .beam_of
        .iter()
        .enumerate()
        .filter(|(_, &b)| !dropped[b as usize])
        .map(|(i, _)| i)
        .collect();
    Ok(CorruptedFrame::retained(frame, &keep))
}

/// Beams kept when thinning `beam_count` beams to `kept`: equal stride over
/// the elevation-ordered list, starting at the top beam.
pub fn cross_sensor_beams(beam_count: u32, kept: u32) -> Vec<u32> {
    (0..u64::from(kept))
        .map(|i| (i * u64::from(beam_count) / u64::from(kept)) as u32)
        .collect()
}

/// Positions `0..len` surviving an equal-interval subsample keeping a
/// `keep` share; `ceil(len·keep)` of them, starting with position 0.
pub fn equal_interval_positions(len: usize, keep: f64) -> Vec<usize> {
    (0..len)
        .filter(|&j| (j as f64 * keep).ceil() < ((j + 1) as f64 * keep).ceil())
        .collect()
}

/// Simulates a sparser sensor: keeps `beams_kept` beams at equal stride,
/// then an equal-interval `subsample_keep` share of each surviving beam's
/// points in their original order. No randomness.
pub fn apply_cross_sensor(
    frame: &Frame,
    partition: &BeamPartition,
    beams_kept: u32,
    subsample_keep: f64,
) -> Result<CorruptedFrame> {
    check_partition(frame, partition)?;
    if beams_kept == 0 || beams_kept > partition.beam_count {
        return Err(Error::Precondition(format!(
            "beams_kept {beams_kept} outside [1, {}]",
            partition.beam_count
        )));
    }
    if !(subsample_keep > 0.0 && subsample_keep <= 1.0) {
        return Err(Error::Precondition(format!(
            "subsample_keep must lie in (0, 1], got {subsample_keep}"
        )));
    }
    if beams_kept == partition.beam_count && subsample_keep == 1.0 {
        return Ok(CorruptedFrame::unchanged(frame));
    }
    let members = partition.members();
    let mut keep = Vec::new();
    for beam in cross_sensor_beams(partition.beam_count, beams_kept) {
        let points = &members[beam as usize];
        keep.extend(equal_interval_positions(points.len(), subsample_keep).into_iter().map(|j| points[j]));
    }
    keep.sort_unstable();
    Ok(CorruptedFrame::retained(frame, &keep))
}
