use std::io::{self, Write};

use super::Trajectory;

pub fn csv_header(n: usize) -> String {
    let mut cols = vec!["t".to_string()];
    for prefix in ["q", "dq", "d2q", "d3q"] {
        cols.extend((1..=n).map(|i| format!("{prefix}_{i}")));
    }
    cols.join(",")
}

/// Writes one row per sample: `t, q_1..q_n, dq_1..dq_n, d2q_.., d3q_..`,
/// all in `{:.16e}` so values round-trip.
pub fn write_csv<W: Write>(traj: &Trajectory, mut w: W) -> io::Result<()> {
    writeln!(w, "{}", csv_header(traj.dim()))?;
    for s in &traj.states {
        write!(w, "{:.16e}", s.t)?;
        for block in s.components() {
            for x in block {
                write!(w, ",{x:.16e}")?;
            }
        }
        writeln!(w)?;
    }
    Ok(())
}
