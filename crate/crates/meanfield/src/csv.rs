// SPDX-License-Identifier: Apache-2.0

//! CSV writers. Reals use Rust's shortest round-trip formatting, so parsing
//! a field back yields the same `f64`.

use std::io::{self, Write};

use meanfield_core::estimation::{Estimate, LimitMomentReport, MomentReport, RateOutcome, RateReport};
use meanfield_core::generators::GeneratorReport;
use meanfield_core::limit::AuxPath;
use meanfield_core::path::Trajectory;

/// `t,x,y,event,mark`; the mark is empty except on `spike1` rows.
pub fn write_trajectory<W: Write>(w: &mut W, traj: &Trajectory) -> io::Result<()> {
    writeln!(w, "t,x,y,event,mark")?;
    for r in &traj.records {
        write!(w, "{},{},{},{},", r.t, r.x, r.y, r.event.label())?;
        match r.event.mark() {
            Some(u) => writeln!(w, "{u}")?,
            None => writeln!(w)?,
        }
    }
    Ok(())
}

/// Trajectory columns plus the cumulative `log_weight`.
pub fn write_aux_path<W: Write>(w: &mut W, path: &AuxPath) -> io::Result<()> {
    writeln!(w, "t,x,y,event,mark,log_weight")?;
    for a in &path.records {
        let r = a.record;
        writeln!(w, "{},{},{},{},,{}", r.t, r.x, r.y, r.event.label(), a.log_weight)?;
    }
    Ok(())
}

pub fn write_generator_check<W: Write>(w: &mut W, rows: &[GeneratorReport]) -> io::Result<()> {
    writeln!(w, "x,y,N,AN,Abar,gap,bound,ok")?;
    for r in rows {
        writeln!(
            w,
            "{},{},{},{},{},{},{},{}",
            r.x, r.y, r.n, r.value_an, r.value_abar, r.gap, r.bound, r.bound_satisfied
        )?;
    }
    Ok(())
}

pub fn write_rate_study<W: Write>(w: &mut W, report: &RateReport) -> io::Result<()> {
    writeln!(w, "N,mean_N,stderr_N,mean_limit,stderr_limit,error,combined_stderr,noise_dominated")?;
    let lim = &report.limit;
    for p in &report.points {
        writeln!(
            w,
            "{},{},{},{},{},{},{},{}",
            p.n, p.finite.mean, p.finite.stderr, lim.mean, lim.stderr, p.error, p.combined_stderr, p.noise_dominated
        )?;
    }
    Ok(())
}

/// `slope,slope_ci_lo,slope_ci_hi,points_used`; the slope fields are empty
/// when the study is inconclusive.
pub fn write_rate_summary<W: Write>(w: &mut W, report: &RateReport) -> io::Result<()> {
    writeln!(w, "slope,slope_ci_lo,slope_ci_hi,points_used")?;
    match report.outcome {
        RateOutcome::Fitted { slope, ci_lo, ci_hi, points_used } => {
            writeln!(w, "{slope},{ci_lo},{ci_hi},{points_used}")
        }
        RateOutcome::Inconclusive { points_used } => writeln!(w, ",,,{points_used}"),
    }
}

pub fn write_moment_check<W: Write>(w: &mut W, rows: &[MomentReport]) -> io::Result<()> {
    writeln!(w, "N,t,mean,stderr,bound,passed")?;
    for r in rows {
        writeln!(w, "{},{},{},{},{},{}", r.n, r.t, r.estimate.mean, r.estimate.stderr, r.bound, r.passed)?;
    }
    Ok(())
}

pub fn write_limit_moments<W: Write>(w: &mut W, report: &LimitMomentReport) -> io::Result<()> {
    writeln!(w, "t,x2,x2_stderr,y2,y2_stderr")?;
    for r in &report.rows {
        writeln!(w, "{},{},{},{},{}", r.t, r.x2, r.x2_stderr, r.y2, r.y2_stderr)?;
    }
    Ok(())
}

/// `estimator,mean,stderr,reps` for the direct and the reweighted limit
/// estimates, then `difference,combined_stderr,ok`.
pub fn write_girsanov_check<W: Write>(w: &mut W, direct: &Estimate, weighted: &Estimate) -> io::Result<()> {
    writeln!(w, "estimator,mean,stderr,reps")?;
    writeln!(w, "limit,{},{},{}", direct.mean, direct.stderr, direct.reps)?;
    writeln!(w, "girsanov,{},{},{}", weighted.mean, weighted.stderr, weighted.reps)?;
    let diff = (direct.mean - weighted.mean).abs();
    let se = direct.combined_stderr(weighted);
    writeln!(w)?;
    writeln!(w, "difference,combined_stderr,ok")?;
    writeln!(w, "{diff},{se},{}", diff <= 3.0 * se)
}
