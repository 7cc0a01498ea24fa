//! Trajectory records shared by the billiard and the random flight process,
//! and their CSV dump format.

use std::io::{self, Write};

use crate::geometry::{Direction, Vec2};

/// Formats `x` with 15 significant digits, in plain notation for moderate
/// magnitudes and scientific notation otherwise.
pub fn fmt_sig15(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return format!("{x}");
    }
    let exp = x.abs().log10().floor() as i32;
    if (-5..15).contains(&exp) {
        let decimals = (14 - exp).max(0) as usize;
        let s = format!("{:.*}", decimals, x);
        // rounding may have carried into a new leading digit
        let s = if s.contains('.') {
            s.trim_end_matches('0').trim_end_matches('.').to_string()
        } else {
            s
        };
        if s == "-0" {
            "0".to_string()
        } else {
            s
        }
    } else {
        format!("{:.14e}", x)
    }
}

/// One row of a trajectory dump.
pub trait EventRow {
    /// Name of the sixth column: `s_out` for the billiard, `z_prev` for flights.
    const PARAMETER_COLUMN: &'static str;

    fn tau(&self) -> f64;
    fn velocity(&self) -> Direction;
    fn impact(&self) -> f64;
    fn parameter(&self) -> Option<f64>;
    fn scatterer(&self) -> Option<[i64; 2]>;
}

/// Initial data and the ordered collision events of one trajectory.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryRecord<E> {
    /// Initial position in macroscopic units.
    pub x0: Vec2,
    pub v0: Direction,
    pub events: Vec<E>,
    /// The trajectory stopped early: a free flight exceeded the cap.
    pub truncated: bool,
}

impl<E: EventRow> TrajectoryRecord<E> {
    pub fn taus(&self) -> impl Iterator<Item = f64> + '_ {
        self.events.iter().map(|e| e.tau())
    }
}

/// Header of the trajectory CSV for event type `E`.
pub fn csv_header<E: EventRow>() -> String {
    format!(
        "trajectory_id,k,tau_k,phi_of_v_k,b_in,{},m_x,m_y",
        E::PARAMETER_COLUMN
    )
}

/// Writes the header and one row per event of every trajectory.
pub fn write_csv<E: EventRow, W: Write>(
    out: &mut W,
    trajectories: &[TrajectoryRecord<E>],
) -> io::Result<()> {
    writeln!(out, "{}", csv_header::<E>())?;
    for (id, traj) in trajectories.iter().enumerate() {
        for (k, e) in traj.events.iter().enumerate() {
            let param = e.parameter().map(fmt_sig15).unwrap_or_default();
            let (mx, my) = match e.scatterer() {
                Some([a, b]) => (a.to_string(), b.to_string()),
                None => (String::new(), String::new()),
            };
            writeln!(
                out,
                "{},{},{},{},{},{},{},{}",
                id,
                k + 1,
                fmt_sig15(e.tau()),
                fmt_sig15(e.velocity().angle()),
                fmt_sig15(e.impact()),
                param,
                mx,
                my
            )?;
        }
    }
    Ok(())
}
