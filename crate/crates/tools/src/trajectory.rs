//! Trajectory export.

use std::io::{self, Write};

use screwchain::sim::Trajectory;

use crate::format::fmt_g;

/// `t,q1..qn,qd1..qdn,tau1..taun,ee_x,ee_y,ee_z`.
pub fn csv_header(dof: usize) -> String {
    let mut cols = vec!["t".to_string()];
    for prefix in ["q", "qd", "tau"] {
        cols.extend((1..=dof).map(|i| format!("{prefix}{i}")));
    }
    cols.extend(["ee_x", "ee_y", "ee_z"].map(String::from));
    cols.join(",")
}

pub fn write_csv(traj: &Trajectory, mut out: impl Write) -> io::Result<()> {
    writeln!(out, "{}", csv_header(traj.dof))?;
    let mut line = String::new();
    for s in &traj.samples {
        line.clear();
        line.push_str(&fmt_g(s.t));
        let values =
            s.q.iter()
                .chain(s.qdot.iter())
                .chain(s.tau.iter())
                .chain(s.ee.translation.iter());
        for v in values {
            line.push(',');
            line.push_str(&fmt_g(*v));
        }
        writeln!(out, "{line}")?;
    }
    Ok(())
}
