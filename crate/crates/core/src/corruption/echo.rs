use super::{fractional_count, sample_sorted, CorruptedFrame, Frame, STREAM_SELECT};
use crate::error::{Error, Result};
use crate::profile::DatasetProfile;
use crate::rng::CounterRng;

/// Indices of points on vehicles: by semantic class when the frame has
/// labels and the profile names vehicle classes, otherwise by containment in
/// a box of a vehicle class.
pub fn vehicle_points(frame: &Frame, profile: &DatasetProfile) -> Result<Vec<usize>> {
    match (&frame.labels, &frame.boxes) {
        (Some(labels), _) if !profile.vehicle_classes.is_empty() => Ok(labels
            .semantic
            .iter()
            .enumerate()
            .filter(|(_, s)| profile.is_vehicle_class(**s))
            .map(|(i, _)| i)
            .collect()),
        (_, Some(boxes)) => {
            let vehicles: Vec<_> = boxes
                .boxes
                .iter()
                .filter(|b| profile.vehicle_box_classes.contains(&b.class_id))
                .collect();
            Ok(frame
                .cloud
                .xyz
                .iter()
                .enumerate()
                .filter(|(_, p)| vehicles.iter().any(|b| b.contains(**p)))
                .map(|(i, _)| i)
                .collect())
        }
        _ => Err(Error::Precondition(
            "incomplete echo needs semantic labels or bounding boxes".into(),
        )),
    }
}

/// Deletes `round(k_e·|V|)` uniformly chosen vehicle points with their
/// labels. Boxes are returned unchanged.
pub fn apply_incomplete_echo(frame: &Frame, profile: &DatasetProfile, k_e: f64, seed: u64) -> Result<CorruptedFrame> {
    frame.check_aligned()?;
    if !(0.0..=1.0).contains(&k_e) {
        return Err(Error::Precondition(format!("k_e must lie in [0, 1], got {k_e}")));
    }
    let vehicles = vehicle_points(frame, profile)?;
    let amount = fractional_count(k_e, vehicles.len());
    if amount == 0 {
        return Ok(CorruptedFrame::unchanged(frame));
    }
    let mut rng = CounterRng::new(seed).stream(STREAM_SELECT);
    let mut dropped = vec![false; frame.cloud.len()];
    for j in sample_sorted(&mut rng, vehicles.len(), amount) {
        dropped[vehicles[j]] = true;
    }
    let keep: Vec<usize> = (0..frame.cloud.len()).filter(|&i| !dropped[i]).collect();
    Ok(CorruptedFrame::retained(frame, &keep))
}
