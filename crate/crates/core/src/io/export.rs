//! CSV writers for probability heatmaps and per-step frames.
//!
//! Numbers are written in scientific notation with 12 significant digits so
//! that identical runs produce identical files.

use std::io::Write;

use crate::error::Result;
use crate::lattice::Lattice;
use crate::spinor::SpinorField;

pub const HEATMAP_HEADER: &str = "t,j,P";
pub const FRAMES_HEADER: &str = "frame,j,P_up,P_down";

/// Fixed-width decimal form used in every CSV column.
pub fn format_number(x: f64) -> String {
    format!("{x:.11e}")
}

/// Writes `t,j,P` rows for every sampled `t` and every site with `P > floor`.
pub fn write_heatmap<W: Write>(
    out: &mut W,
    lattice: &Lattice,
    frames: &[(usize, Vec<f64>)],
    floor: f64,
) -> Result<()> {
    writeln!(out, "{HEATMAP_HEADER}")?;
    for (t, p) in frames {
        for (i, &v) in p.iter().enumerate() {
            if v > floor {
                writeln!(out, "{t},{},{}", lattice.site(i), format_number(v))?;
            }
        }
    }
    Ok(())
}

pub fn write_frames_header<W: Write>(out: &mut W) -> Result<()> {
    writeln!(out, "{FRAMES_HEADER}")?;
    Ok(())
}

/// Appends the rows of one frame; sites where both probabilities are at
/// most `floor` are skipped.
pub fn write_frame<W: Write>(out: &mut W, frame: usize, state: &SpinorField, floor: f64) -> Result<()> {
    let l = state.lattice();
    for (i, (u, d)) in state.up().iter().zip(state.down()).enumerate() {
        let (pu, pd) = (u.norm_sqr(), d.norm_sqr());
        if pu > floor || pd > floor {
            writeln!(
                out,
                "{frame},{},{},{}",
                l.site(i),
                format_number(pu),
                format_number(pd)
            )?;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::probability_distribution;
    use crate::spinor::BlochSpin;
    use crate::walk::{evolve, Homogeneous, Sampling};

    fn rows(text: &str) -> Vec<(usize, i64, f64)> {
        text.lines()
            .skip(1)
            .map(|l| {
                let f: Vec<&str> = l.split(',').collect();
                (f[0].parse().unwrap(), f[1].parse().unwrap(), f[2].parse().unwrap())
            })
            .collect()
    }

    #[test]
    fn delta_run_rows_and_sums() {
        let l = Lattice::symmetric(10).unwrap();
        let s0 = SpinorField::localized(l, 0, BlochSpin::PLUS_I.amplitudes()).unwrap();
        let ev = evolve(s0, Homogeneous::hadamard(l), 3, &Sampling::probabilities(1)).unwrap();
        let frames = &ev.trajectory.probabilities;
        assert_eq!(frames.len(), 4);
        let mut buf = Vec::new();
        write_heatmap(&mut buf, &l, frames, 0.0).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().next(), Some(HEATMAP_HEADER));
        let nonzero: usize = frames.iter().map(|(_, p)| p.iter().filter(|&&v| v > 0.0).count()).sum();
        let r = rows(&text);
        assert_eq!(r.len(), nonzero);
        assert!(r.len() <= l.size() * 4);
        for t in 0..4 {
            let sum: f64 = r.iter().filter(|x| x.0 == t).map(|x| x.2).sum();
            assert!((sum - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn flooring_drops_rows_but_keeps_mass() {
        let l = Lattice::symmetric(200).unwrap();
        let g = crate::spinor::gaussian_state(
            crate::spinor::GaussianSpec::new(10.0, 0).unwrap(),
            BlochSpin::PLUS_I,
            &l,
        )
        .unwrap();
        let frames = vec![(0, probability_distribution(&g))];
        let (mut a, mut b) = (Vec::new(), Vec::new());
        write_heatmap(&mut a, &l, &frames, 0.0).unwrap();
        write_heatmap(&mut b, &l, &frames, 1e-12).unwrap();
        assert!(b.len() < a.len());
        let sum: f64 = rows(&String::from_utf8(b).unwrap()).iter().map(|x| x.2).sum();
        assert!(sum >= 1.0 - 1e-9);
    }

    #[test]
    fn number_format_is_fixed() {
        assert_eq!(format_number(0.5), "5.00000000000e-1");
        assert_eq!(format_number(1.0 / 3.0), "3.33333333333e-1");
    }
}
