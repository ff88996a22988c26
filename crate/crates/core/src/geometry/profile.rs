//! Two-dimensional section profiles: camber line plus thickness laid off
//! normal to it.

use serde::{Deserialize, Serialize};

use super::blade::SectionDefinition;
use super::interp::Pchip;
use crate::error::{Error, Result};

/// Which blade surface a point belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Side {
    /// Pressure side, below the camber line.
    Face,
    /// Suction side, above the camber line.
    Back,
}

impl Side {
    pub const BOTH: [Side; 2] = [Side::Face, Side::Back];

    /// +1 for the face, −1 for the back.
    pub fn sign(self) -> f64 {
        match self {
            Side::Face => 1.0,
            Side::Back => -1.0,
        }
    }

    fn normal_offset_sign(self) -> f64 {
        match self {
            Side::Face => -1.0,
            Side::Back => 1.0,
        }
    }
}

/// Profile point with derivatives with respect to chord fraction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProfilePoint {
    /// Distance from the leading edge along the chord line.
    pub x: f64,
    /// Offset normal to the chord line, positive toward the back.
    pub y: f64,
    pub dx: f64,
    pub dy: f64,
}

/// Continuous description of one section.
#[derive(Debug, Clone, PartialEq)]
pub struct SectionShape {
    chord: f64,
    camber: Pchip,
    thickness: Pchip,
}

impl SectionShape {
    pub fn new(section: &SectionDefinition) -> Result<Self> {
        section.validate()?;
        let (cu, cv): (Vec<f64>, Vec<f64>) = section.camber.iter().copied().unzip();
        let (tu, mut tv): (Vec<f64>, Vec<f64>) = section.thickness.iter().copied().unzip();
        // Edges are closed: both surfaces meet at the camber line end points.
        tv[0] = 0.0;
        let last = tv.len() - 1;
        tv[last] = 0.0;
        Ok(Self {
            chord: section.chord,
            camber: Pchip::new(&cu, &cv)?,
            thickness: Pchip::new(&tu, &tv)?,
        })
    }

    pub fn chord(&self) -> f64 {
        self.chord
    }

    pub fn camber_at(&self, u: f64) -> f64 {
        self.camber.eval(u)
    }

    pub fn thickness_at(&self, u: f64) -> f64 {
        self.thickness.eval(u)
    }

    /// Surface point at chord fraction `u` on the given side.
    pub fn point(&self, side: Side, u: f64) -> ProfilePoint {
        let sigma = side.normal_offset_sign();
        let (c, c_u, c_uu) = self.camber.eval_all(u);
        let (t, t_u, _) = self.thickness.eval_all(u);
        let slope = c_u / self.chord;
        let slope_u = c_uu / self.chord;
        let norm = (1.0 + slope * slope).sqrt();
        let (sin_g, cos_g) = (slope / norm, 1.0 / norm);
        let gamma_u = slope_u / (1.0 + slope * slope);
        let half = 0.5 * t;
        ProfilePoint {
            x: u * self.chord - sigma * half * sin_g,
            y: c + sigma * half * cos_g,
            dx: self.chord - sigma * (0.5 * t_u * sin_g + half * cos_g * gamma_u),
            dy: c_u + sigma * (0.5 * t_u * cos_g - half * sin_g * gamma_u),
        }
    }
}

/// Sampled closed profile of one section.
#[derive(Debug, Clone, PartialEq)]
pub struct SectionProfile {
    pub chord_fractions: Vec<f64>,
    /// Back (suction) side, leading to trailing edge.
    pub upper: Vec<[f64; 2]>,
    /// Face (pressure) side, leading to trailing edge.
    pub lower: Vec<[f64; 2]>,
}

impl SectionProfile {
    /// Largest distance between matching upper and lower points.
    pub fn max_gap(&self) -> f64 {
        self.upper
            .iter()
            .zip(&self.lower)
            .map(|(a, b)| ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt())
            .fold(0.0, f64::max)
    }
}

/// Samples `n_points` uniformly spaced chord fractions of a section on both
/// sides. Upper and lower curves share their first and last point.
pub fn build_section_profile(
    section: &SectionDefinition,
    n_points: usize,
) -> Result<SectionProfile> {
    if n_points < 8 {
        return Err(Error::InvalidInput(format!(
            "profile needs at least 8 points, got {n_points}"
        )));
    }
    let shape = SectionShape::new(section)?;
    let chord_fractions: Vec<f64> = (0..n_points)
        .map(|i| i as f64 / (n_points - 1) as f64)
        .collect();
    if let Some(u) = chord_fractions
        .iter()
        .find(|&&u| shape.thickness_at(u) < 0.0)
    {
        return Err(Error::InvalidGeometry(format!(
            "thickness interpolates negative at chord fraction {u}"
        )));
    }
    let sample = |side| {
        chord_fractions
            .iter()
            .map(|&u| {
                let p = shape.point(side, u);
                [p.x, p.y]
            })
            .collect::<Vec<_>>()
    };
    Ok(SectionProfile {
        upper: sample(Side::Back),
        lower: sample(Side::Face),
        chord_fractions,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::blade::{deform_blade, BladeDefinition, DeformationParams};

    fn flat_section(thickness: Vec<(f64, f64)>) -> SectionDefinition {
        SectionDefinition {
            radius_fraction: 0.5,
            pitch: 1.0,
            chord: 0.2,
            camber: vec![(0.0, 0.0), (0.5, 0.0), (1.0, 0.0)],
            thickness,
            rake: 0.0,
            skew: 0.0,
        }
    }

    #[test]
    fn zero_thickness_collapses_to_chord() {
        let s = flat_section(vec![(0.0, 0.0), (0.4, 0.0), (1.0, 0.0)]);
        let p = build_section_profile(&s, 21).unwrap();
        for ((a, b), u) in p.upper.iter().zip(&p.lower).zip(&p.chord_fractions) {
            assert_eq!(a, b);
            assert!((a[0] - u * 0.2).abs() < 1e-15);
            assert_eq!(a[1], 0.0);
        }
    }

    #[test]
    fn symmetric_section_mirrors() {
        let s = flat_section(vec![(0.0, 0.0), (0.3, 0.012), (0.7, 0.008), (1.0, 0.0)]);
        let p = build_section_profile(&s, 33).unwrap();
        for (a, b) in p.upper.iter().zip(&p.lower) {
            assert_eq!(a[0], b[0]);
            assert_eq!(a[1], -b[1]);
        }
    }

    #[test]
    fn edges_are_closed() {
        let b = BladeDefinition::synthetic_baseline();
        let p = build_section_profile(&b.sections[3], 50).unwrap();
        assert_eq!(p.upper[0], p.lower[0]);
        assert_eq!(p.upper[49], p.lower[49]);
    }

    #[test]
    fn thickness_factor_scales_max_gap() {
        let b = BladeDefinition::synthetic_baseline();
        let d = deform_blade(&b, &DeformationParams::new(1.0, 1.0, 1.0, 1.3)).unwrap();
        for (s0, s1) in b.sections.iter().zip(&d.sections) {
            let g0 = build_section_profile(s0, 201).unwrap().max_gap();
            let g1 = build_section_profile(s1, 201).unwrap().max_gap();
            assert!((g1 / g0 - 1.3).abs() < 1e-12, "ratio {}", g1 / g0);
        }
    }

    #[test]
    fn gap_equals_local_thickness() {
        let b = BladeDefinition::synthetic_baseline();
        let shape = SectionShape::new(&b.sections[2]).unwrap();
        for i in 0..=20 {
            let u = i as f64 / 20.0;
            let (a, c) = (shape.point(Side::Back, u), shape.point(Side::Face, u));
            let gap = ((a.x - c.x).powi(2) + (a.y - c.y).powi(2)).sqrt();
            assert!((gap - shape.thickness_at(u)).abs() < 1e-14);
        }
    }

    #[test]
    fn derivatives_match_finite_differences() {
        let b = BladeDefinition::synthetic_baseline();
        let shape = SectionShape::new(&b.sections[1]).unwrap();
        let h = 1e-7;
        for side in Side::BOTH {
            for &u in &[0.07, 0.26, 0.44, 0.83] {
                let p = shape.point(side, u);
                let (a, c) = (shape.point(side, u + h), shape.point(side, u - h));
                assert!((p.dx - (a.x - c.x) / (2.0 * h)).abs() < 1e-6);
                assert!((p.dy - (a.y - c.y) / (2.0 * h)).abs() < 1e-6);
            }
        }
    }

    #[test]
    fn too_few_points_rejected() {
        let b = BladeDefinition::synthetic_baseline();
        assert!(build_section_profile(&b.sections[0], 7).is_err());
    }
}
