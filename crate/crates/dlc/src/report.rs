//! Text, record and CSV renderings of analysis and gradient-check results.

use std::fmt::Write;

use dlc_core::analysis::{DerivativeReport, ShadowLifting};
use dlc_core::gradcheck::GradCheckReport;

fn mark(b: bool) -> &'static str {
    if b {
        "✓"
    } else {
        "✗"
    }
}

fn opt_mark(b: Option<bool>) -> &'static str {
    b.map_or("n/a", mark)
}

fn opt_flag(b: Option<bool>) -> String {
    b.map_or("none".into(), |v| v.to_string())
}

pub fn shadow_text(rs: &[ShadowLifting]) -> String {
    let mut out = String::new();
    for r in rs {
        let _ = write!(
            out,
            "{}: shadow-lifting {}  min partial {:.6}  witnesses {}/{}",
            r.logic,
            mark(r.holds),
            r.min_partial(),
            r.witnesses.len(),
            r.samples.len()
        );
        if let Some(w) = r.witnesses.first() {
            let _ = write!(out, "  first witness rho={:.6} (d1={:.6}, d2={:.6})", w.rho, w.d1, w.d2);
        }
        out.push('\n');
    }
    out
}

pub fn shadow_records(rs: &[ShadowLifting]) -> String {
    let mut out = String::new();
    for r in rs {
        let _ = write!(
            out,
            "logic={} shadow_lifting={} samples={} witnesses={} min_partial={}",
            r.logic,
            r.holds,
            r.samples.len(),
            r.witnesses.len(),
            r.min_partial()
        );
        if let Some(w) = r.witnesses.first() {
            let _ = write!(out, " witness_rho={}", w.rho);
        }
        out.push('\n');
    }
    out
}

pub fn shadow_csv(rs: &[ShadowLifting]) -> String {
    let mut out = String::from("logic,shadow_lifting,samples,witnesses,min_partial,witness_rho\n");
    for r in rs {
        let w = r.witnesses.first().map_or(String::new(), |w| w.rho.to_string());
        let _ = writeln!(out, "{},{},{},{},{},{w}", r.logic, r.holds, r.samples.len(), r.witnesses.len(), r.min_partial());
    }
    out
}

pub fn implication_text(rs: &[DerivativeReport]) -> String {
    let mut out = String::new();
    for r in rs {
        let _ = writeln!(
            out,
            "{}: MP {}  MT {}  shadow-lifting {}",
            r.logic,
            opt_mark(r.mp_following),
            opt_mark(r.mt_following),
            mark(r.shadow_lifting)
        );
        let _ = writeln!(
            out,
            "  vanishing gradient: both {:.4}  dI/dx {:.4}  dI/dy {:.4}  ({} grid points)",
            r.vanishing_fraction,
            r.vanishing_dx_fraction,
            r.vanishing_dy_fraction,
            r.points.len()
        );
        let _ = writeln!(
            out,
            "  confident MP min dI/dy {:.4}  doubtful MP max dI/dy {:.4}  MT max dI/dx {:.4}",
            r.mp_confident_min_dy, r.mp_doubtful_max_dy, r.mt_max_dx
        );
    }
    out
}

pub fn implication_records(rs: &[DerivativeReport]) -> String {
    let mut out = String::new();
    for r in rs {
        let _ = writeln!(
            out,
            "logic={} mp_following={} mt_following={} shadow_lifting={} vanishing={} vanishing_dx={} vanishing_dy={} mp_confident_min_dy={} mp_doubtful_max_dy={} mt_max_dx={} points={}",
            r.logic,
            opt_flag(r.mp_following),
            opt_flag(r.mt_following),
            r.shadow_lifting,
            r.vanishing_fraction,
            r.vanishing_dx_fraction,
            r.vanishing_dy_fraction,
            r.mp_confident_min_dy,
            r.mp_doubtful_max_dy,
            r.mt_max_dx,
            r.points.len()
        );
    }
    out
}

pub fn implication_csv(rs: &[DerivativeReport]) -> String {
    let mut out = String::from(
        "logic,mp_following,mt_following,shadow_lifting,vanishing,vanishing_dx,vanishing_dy,mp_confident_min_dy,mp_doubtful_max_dy,mt_max_dx\n",
    );
    for r in rs {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{}",
            r.logic,
            opt_flag(r.mp_following),
            opt_flag(r.mt_following),
            r.shadow_lifting,
            r.vanishing_fraction,
            r.vanishing_dx_fraction,
            r.vanishing_dy_fraction,
            r.mp_confident_min_dy,
            r.mp_doubtful_max_dy,
            r.mt_max_dx
        );
    }
    out
}

/// Every grid point of every report, ready for plotting.
pub fn implication_grid_csv(rs: &[DerivativeReport]) -> String {
    let mut out = String::from("logic,x,y,dx,dy\n");
    for r in rs {
        for p in &r.points {
            let _ = writeln!(out, "{},{},{},{},{}", r.logic, p.x, p.y, p.dx, p.dy);
        }
    }
    out
}

pub fn gradcheck_text(rs: &[GradCheckReport]) -> String {
    let mut out = String::new();
    for r in rs {
        for c in &r.checks {
            let _ = writeln!(
                out,
                "{:<22} {:<22} {:>4} points  max rel err {:.3e}  (tol {:.0e})  {}",
                r.logic.kind.name(),
                c.name,
                c.points,
                c.max_error,
                c.tolerance,
                if c.passed() { "ok" } else { "FAILED" }
            );
        }
    }
    let worst = rs.iter().map(|r| r.max_error()).fold(0.0, f64::max);
    let _ = writeln!(out, "max relative error: {worst:.3e}");
    out
}

pub fn gradcheck_records(rs: &[GradCheckReport]) -> String {
    let mut out = String::new();
    for r in rs {
        for c in &r.checks {
            let _ = writeln!(
                out,
                "logic={} check={} points={} max_error={} tolerance={} passed={}",
                r.logic.kind,
                c.name.replace(' ', "_"),
                c.points,
                c.max_error,
                c.tolerance,
                c.passed()
            );
        }
    }
    out
}

pub fn gradcheck_csv(rs: &[GradCheckReport]) -> String {
    let mut out = String::from("logic,check,points,max_error,tolerance,passed\n");
    for r in rs {
        for c in &r.checks {
            let _ = writeln!(out, "{},{},{},{},{},{}", r.logic.kind, c.name, c.points, c.max_error, c.tolerance, c.passed());
        }
    }
    out
}
