//! Fixed-format numeric CSV: every value in 9-significant-digit scientific
//! notation with a signed two-digit exponent, e.g. `-1.23456789e+03`.

use std::fmt::Write as _;

use crate::freq::BodeTable;
use crate::mpt::{BoundaryPoint, SweepPlane};
use crate::sim::TimeSeries;

pub const BODE_HEADER: &str =
    "omega_rad_s,freq_hz,mag_a_db,phase_a_deg,mag_p_db,phase_p_deg,mag_s_db,phase_s_deg";
pub const SERIES_HEADER: &str = "t_s,f_hz,p_t_w,p_a_w,p_p_w,p_s_w,v_dc_v,delta_q_j,soc";
pub const SWEEP_HEADER: &str = "p_grid_w,c_dc2_f,mu1,mu2,mu_sum,stable";
pub const BOUNDARY_HEADER: &str = "p_grid_w,c_dc2_boundary_f";

pub fn format_sci(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let x = if x == 0.0 { 0.0 } else { x };
    let raw = format!("{x:.8e}");
    let (mantissa, exp) = raw.split_once('e').expect("`e` formatting has an exponent");
    let exp: i32 = exp.parse().expect("integer exponent");
    let sign = if exp < 0 { '-' } else { '+' };
    format!("{mantissa}e{sign}{:02}", exp.abs())
}

fn push_row(out: &mut String, values: &[f64]) {
    for (i, v) in values.iter().enumerate() {
        if i > 0 {
            out.push(',');
        }
        out.push_str(&format_sci(*v));
    }
    out.push('\n');
}

pub fn bode_csv(table: &BodeTable) -> String {
    let mut out = format!("{BODE_HEADER}\n");
    for r in &table.rows {
        push_row(
            &mut out,
            &[
                r.omega, r.freq, r.mag_a, r.phase_a, r.mag_p, r.phase_p, r.mag_s, r.phase_s,
            ],
        );
    }
    out
}

pub fn series_csv(series: &TimeSeries) -> String {
    let mut out = format!("{SERIES_HEADER}\n");
    for r in &series.rows {
        push_row(
            &mut out,
            &[r.t, r.f, r.p_t, r.p_a, r.p_p, r.p_s, r.v_dc, r.delta_q, r.soc],
        );
    }
    out
}

pub fn sweep_csv(plane: &SweepPlane) -> String {
    let mut out = format!("{SWEEP_HEADER}\n");
    for (i, &p) in plane.p_grid.iter().enumerate() {
        for (j, &c) in plane.c_dc2.iter().enumerate() {
            let r = plane.at(i, j);
            push_row(&mut out, &[p, c, r.mu1, r.mu2, r.mu_sum]);
            out.pop();
            let _ = writeln!(out, ",{}", u8::from(r.stable));
        }
    }
    out
}

pub fn boundary_csv(points: &[BoundaryPoint]) -> String {
    let mut out = format!("{BOUNDARY_HEADER}\n");
    for b in points {
        push_row(&mut out, &[b.p_grid, b.c_dc2]);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nine_significant_digits() {
        assert_eq!(format_sci(1234.5), "1.23450000e+03");
        assert_eq!(format_sci(-0.000123456789123), "-1.23456789e-04");
        assert_eq!(format_sci(0.0), "0.00000000e+00");
        assert_eq!(format_sci(-0.0), "0.00000000e+00");
        assert_eq!(format_sci(6.02e123), "6.02000000e+123");
        assert_eq!(format_sci(9.999999999), "1.00000000e+01");
    }

    #[test]
    fn parses_back_to_nine_digits() {
        for x in [std::f64::consts::PI, -2.0 / 3.0, 7.5e-300, 1.0e300] {
            let y: f64 = format_sci(x).parse().unwrap();
            assert!(((y - x) / x).abs() < 5e-9);
        }
    }
}
