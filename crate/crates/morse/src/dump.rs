use std::path::Path;

use crate::flow::FlowLine;
use crate::surface::SurfaceModel;
use crate::MorseError;

/// One row per sample: line number, end points, sign, step, position and value.
pub fn write_trajectories_csv(path: &Path, s: &SurfaceModel, lines: &[FlowLine]) -> Result<(), MorseError> {
    let err = |e: csv::Error| MorseError::Dump(e.to_string());
    let mut w = csv::Writer::from_path(path).map_err(err)?;
    w.write_record(["line", "from", "to", "sign", "step", "x", "y", "z", "f"]).map_err(err)?;
    for (n, l) in lines.iter().enumerate() {
        for (k, p) in l.samples.iter().enumerate() {
            w.write_record([
                n.to_string(),
                l.from.to_string(),
                l.to.to_string(),
                l.sign.to_string(),
                k.to_string(),
                p[0].to_string(),
                p[1].to_string(),
                p[2].to_string(),
                s.value(*p).to_string(),
            ])
            .map_err(err)?;
        }
    }
    w.flush().map_err(|e| MorseError::Dump(e.to_string()))
}
