//! Fixed-format CSV emission. Floats are written with 12 significant digits
//! in scientific notation so reruns produce byte-identical files.

use std::io::{self, Write};

use nalgebra::DMatrix;

use crate::dynamics::{ControlField, State};
use crate::field_analysis::FieldSpectrum;
use crate::spectral_stats::Histogram;

/// 12 significant digits, scientific notation.
pub fn fmt_float(x: f64) -> String {
    if x == 0.0 {
        // Avoid "-0.00000000000e0" for negative zero.
        return format!("{:.11e}", 0.0);
    }
    format!("{x:.11e}")
}

/// `row,col,value` with `value = |M_ij|`, one line per entry.
pub fn write_matrix_grid<W: Write>(mut w: W, m: &DMatrix<f64>) -> io::Result<()> {
    writeln!(w, "row,col,value")?;
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            writeln!(w, "{i},{j},{}", fmt_float(m[(i, j)].abs()))?;
        }
    }
    Ok(())
}

pub fn write_histogram<W: Write>(mut w: W, h: &Histogram) -> io::Result<()> {
    writeln!(w, "bin_left,bin_right,density")?;
    for (edge, d) in h.edges().windows(2).zip(h.densities()) {
        writeln!(w, "{},{},{}", fmt_float(edge[0]), fmt_float(edge[1]), fmt_float(*d))?;
    }
    Ok(())
}

pub fn write_field<W: Write>(mut w: W, field: &ControlField) -> io::Result<()> {
    writeln!(w, "t,epsilon")?;
    for (t, e) in field.times().zip(field.samples()) {
        writeln!(w, "{},{}", fmt_float(t), fmt_float(*e))?;
    }
    Ok(())
}

pub fn write_fidelity_history<W: Write>(mut w: W, history: &[f64]) -> io::Result<()> {
    writeln!(w, "iteration,fidelity")?;
    for (i, f) in history.iter().enumerate() {
        writeln!(w, "{i},{}", fmt_float(*f))?;
    }
    Ok(())
}

pub fn write_spectrum<W: Write>(mut w: W, spec: &FieldSpectrum) -> io::Result<()> {
    writeln!(w, "omega,power_density")?;
    for (omega, p) in spec.omegas().zip(spec.power()) {
        writeln!(w, "{},{}", fmt_float(omega), fmt_float(*p))?;
    }
    Ok(())
}

pub fn write_state<W: Write>(mut w: W, state: &State) -> io::Result<()> {
    writeln!(w, "basis_index,re,im")?;
    for (i, c) in state.iter().enumerate() {
        writeln!(w, "{i},{},{}", fmt_float(c.re), fmt_float(c.im))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn float_format_is_stable() {
        assert_eq!(fmt_float(1.0), "1.00000000000e0");
        assert_eq!(fmt_float(-0.0), fmt_float(0.0));
        assert_eq!(fmt_float(123.456), "1.23456000000e2");
    }

    #[test]
    fn grid_layout() {
        let m = DMatrix::from_row_slice(2, 2, &[1.0, -2.0, -2.0, 0.0]);
        let mut out = Vec::new();
        write_matrix_grid(&mut out, &m).unwrap();
        let text = String::from_utf8(out).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "row,col,value");
        assert_eq!(lines[2], "0,1,2.00000000000e0");
        assert_eq!(lines.len(), 5);
    }

    #[test]
    fn history_layout() {
        let mut out = Vec::new();
        write_fidelity_history(&mut out, &[0.5, 0.75]).unwrap();
        assert_eq!(
            String::from_utf8(out).unwrap(),
            "iteration,fidelity\n0,5.00000000000e-1\n1,7.50000000000e-1\n"
        );
    }
}
