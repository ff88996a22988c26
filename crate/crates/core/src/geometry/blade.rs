//! Parametric blade definition and multiplicative deformation.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Cylindrical section of a blade at one radius.
///
/// Camber and thickness are tabulated against chord fraction and carry
/// length units; thickness is measured normal to the camber line.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SectionDefinition {
    pub radius_fraction: f64,
    pub pitch: f64,
    pub chord: f64,
    pub camber: Vec<(f64, f64)>,
    pub thickness: Vec<(f64, f64)>,
    #[serde(default)]
    pub rake: f64,
    #[serde(default)]
    pub skew: f64,
}

impl SectionDefinition {
    pub fn validate(&self) -> Result<()> {
        if !(self.radius_fraction > 0.0 && self.radius_fraction <= 1.0) {
            return Err(Error::InvalidGeometry(format!(
                "radius fraction {} outside (0, 1]",
                self.radius_fraction
            )));
        }
        if !(self.chord > 0.0) || !self.chord.is_finite() {
            return Err(Error::InvalidGeometry(format!(
                "chord must be positive, got {}",
                self.chord
            )));
        }
        if !self.pitch.is_finite() || self.pitch <= 0.0 {
            return Err(Error::InvalidGeometry(format!(
                "pitch must be positive, got {}",
                self.pitch
            )));
        }
        check_station_list("camber", &self.camber)?;
        check_station_list("thickness", &self.thickness)?;
        if let Some(&(u, t)) = self.thickness.iter().find(|(_, t)| *t < 0.0) {
            return Err(Error::InvalidGeometry(format!(
                "negative thickness {t} at chord fraction {u}"
            )));
        }
        Ok(())
    }

    /// Largest tabulated thickness.
    pub fn max_thickness(&self) -> f64 {
        self.thickness.iter().map(|p| p.1).fold(0.0, f64::max)
    }
}

fn check_station_list(name: &str, list: &[(f64, f64)]) -> Result<()> {
    if list.len() < 2 {
        return Err(Error::InvalidGeometry(format!(
            "{name} list needs at least two stations"
        )));
    }
    if list.first().map(|p| p.0) != Some(0.0) || list.last().map(|p| p.0) != Some(1.0) {
        return Err(Error::InvalidGeometry(format!(
            "{name} chord fractions must start at 0 and end at 1"
        )));
    }
    if list.windows(2).any(|w| !(w[1].0 > w[0].0)) {
        return Err(Error::InvalidGeometry(format!(
            "{name} chord fractions must be strictly increasing"
        )));
    }
    if list.iter().any(|p| !p.1.is_finite()) {
        return Err(Error::InvalidGeometry(format!(
            "{name} has non-finite values"
        )));
    }
    Ok(())
}

/// A full propeller blade: hub and tip radius plus its sections, ordered by
/// increasing radius. All blades of the propeller share this geometry.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BladeDefinition {
    pub hub_radius: f64,
    pub tip_radius: f64,
    pub n_blades: usize,
    pub sections: Vec<SectionDefinition>,
}

impl BladeDefinition {
    pub fn diameter(&self) -> f64 {
        2.0 * self.tip_radius
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.hub_radius > 0.0 && self.hub_radius < self.tip_radius) {
            return Err(Error::InvalidGeometry(format!(
                "need 0 < r0 < R, got r0={} R={}",
                self.hub_radius, self.tip_radius
            )));
        }
        if self.n_blades == 0 {
            return Err(Error::InvalidGeometry(
                "propeller needs at least one blade".into(),
            ));
        }
        if self.sections.len() < 4 {
            return Err(Error::InvalidGeometry(format!(
                "lofting needs at least 4 sections, got {}",
                self.sections.len()
            )));
        }
        for s in &self.sections {
            s.validate()?;
        }
        if self
            .sections
            .windows(2)
            .any(|w| !(w[1].radius_fraction > w[0].radius_fraction))
        {
            return Err(Error::InvalidGeometry(
                "sections must be ordered by strictly increasing radius".into(),
            ));
        }
        let root = self.hub_radius / self.tip_radius;
        let first = self.sections[0].radius_fraction;
        let last = self.sections[self.sections.len() - 1].radius_fraction;
        if (first - root).abs() > 1e-9 || (last - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidGeometry(format!(
                "sections must span r0/R={root} to 1, got {first}..{last}"
            )));
        }
        Ok(())
    }

    /// Synthetic stand-in for a six-bladed marine propeller.
    ///
    /// Seven sections evenly spaced from the hub (r0/R = 0.2) to the tip of a
    /// D = 1 m propeller; constant pitch P = D; chord 0.25·D·(1.1 − r/R);
    /// parabolic camber peaking at 2 % chord at mid-chord; thickness made of
    /// two parabolic arcs peaking at 6 % chord at 30 % chord and closing at
    /// both edges; no rake or skew.
    pub fn synthetic_baseline() -> Self {
        let tip = 0.5;
        let diameter = 2.0 * tip;
        let hub_fraction = 0.2;
        let stations = [
            0.0, 0.025, 0.05, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 0.95, 1.0,
        ];
        let n_sections = 7;
        let sections = (0..n_sections)
            .map(|k| {
                let t = k as f64 / (n_sections - 1) as f64;
                let rf = (1.0 - t) * hub_fraction + t;
                let chord = 0.25 * diameter * (1.1 - rf);
                SectionDefinition {
                    radius_fraction: rf,
                    pitch: diameter,
                    chord,
                    camber: stations
                        .iter()
                        .map(|&u| (u, chord * baseline_camber_ratio(u)))
                        .collect(),
                    thickness: stations
                        .iter()
                        .map(|&u| (u, chord * baseline_thickness_ratio(u)))
                        .collect(),
                    rake: 0.0,
                    skew: 0.0,
                }
            })
            .collect();
        Self {
            hub_radius: hub_fraction * tip,
            tip_radius: tip,
            n_blades: 6,
            sections,
        }
    }
}

/// Camber over chord of the synthetic baseline.
pub fn baseline_camber_ratio(u: f64) -> f64 {
    0.02 * 4.0 * u * (1.0 - u)
}

/// Thickness over chord of the synthetic baseline.
pub fn baseline_thickness_ratio(u: f64) -> f64 {
    let (peak, at) = (0.06, 0.3);
    let span = if u <= at { at } else { 1.0 - at };
    let s = (u - at) / span;
    (peak * (1.0 - s * s)).max(0.0)
}

/// Multiplicative deformation factors applied to every section.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DeformationParams {
    pub pitch: f64,
    pub camber: f64,
    pub chord: f64,
    pub thickness: f64,
}

impl DeformationParams {
    pub const IDENTITY: Self = Self::new(1.0, 1.0, 1.0, 1.0);

    pub const fn new(pitch: f64, camber: f64, chord: f64, thickness: f64) -> Self {
        Self {
            pitch,
            camber,
            chord,
            thickness,
        }
    }

    pub const fn from_array(a: [f64; 4]) -> Self {
        Self::new(a[0], a[1], a[2], a[3])
    }

    pub const fn to_array(self) -> [f64; 4] {
        [self.pitch, self.camber, self.chord, self.thickness]
    }

    pub fn is_finite(&self) -> bool {
        self.to_array().iter().all(|v| v.is_finite())
    }

    /// Elementwise product, i.e. the composition of two deformations.
    pub fn compose(self, other: Self) -> Self {
        let (a, b) = (self.to_array(), other.to_array());
        Self::from_array([a[0] * b[0], a[1] * b[1], a[2] * b[2], a[3] * b[3]])
    }

    fn check_positive(&self) -> Result<()> {
        for (name, v) in ["pitch", "camber", "chord", "thickness"]
            .iter()
            .zip(self.to_array())
        {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidParameter(format!(
                    "{name} factor must be finite and positive, got {v}"
                )));
            }
        }
        Ok(())
    }
}

impl Default for DeformationParams {
    fn default() -> Self {
        Self::IDENTITY
    }
}

impl std::fmt::Display for DeformationParams {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "[{}, {}, {}, {}]",
            self.pitch, self.camber, self.chord, self.thickness
        )
    }
}

/// Axis-aligned box of admissible deformation factors.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ParameterBox {
    pub lower: [f64; 4],
    pub upper: [f64; 4],
}

impl Default for ParameterBox {
    /// Pitch ±10 %, camber ±20 %, chord and thickness ±30 %.
    fn default() -> Self {
        Self {
            lower: [0.9, 0.8, 0.7, 0.7],
            upper: [1.1, 1.2, 1.3, 1.3],
        }
    }
}

impl ParameterBox {
    pub fn contains(&self, mu: &DeformationParams) -> bool {
        mu.to_array()
            .iter()
            .enumerate()
            .all(|(i, v)| *v >= self.lower[i] && *v <= self.upper[i])
    }

    pub fn check(&self, mu: &DeformationParams) -> Result<()> {
        if self.contains(mu) {
            Ok(())
        } else {
            Err(Error::InvalidParameter(format!(
                "{mu} outside the parameter box"
            )))
        }
    }

    pub fn clip(&self, mu: &DeformationParams) -> DeformationParams {
        let mut a = mu.to_array();
        for (i, v) in a.iter_mut().enumerate() {
            *v = v.clamp(self.lower[i], self.upper[i]);
        }
        DeformationParams::from_array(a)
    }

    /// Affine map of each factor onto `[0, 1]`.
    pub fn normalize(&self, mu: &DeformationParams) -> [f64; 4] {
        let a = mu.to_array();
        std::array::from_fn(|i| (a[i] - self.lower[i]) / (self.upper[i] - self.lower[i]))
    }

    pub fn denormalize(&self, z: &[f64; 4]) -> DeformationParams {
        DeformationParams::from_array(std::array::from_fn(|i| {
            self.lower[i] + z[i] * (self.upper[i] - self.lower[i])
        }))
    }

    pub fn center(&self) -> DeformationParams {
        self.denormalize(&[0.5; 4])
    }

    /// All 16 corners, enumerated with the pitch factor varying slowest.
    pub fn corners(&self) -> Vec<DeformationParams> {
        (0..16u32)
            .map(|bits| {
                DeformationParams::from_array(std::array::from_fn(|i| {
                    if bits >> (3 - i) & 1 == 1 {
                        self.upper[i]
                    } else {
                        self.lower[i]
                    }
                }))
            })
            .collect()
    }
}

/// Scales pitch, camber heights, chord and thickness of every section by the
/// matching factor. Radii, chord-fraction stations, rake and skew are kept.
pub fn deform_blade(blade: &BladeDefinition, mu: &DeformationParams) -> Result<BladeDefinition> {
    mu.check_positive()?;
    let mut out = blade.clone();
    for s in &mut out.sections {
        s.pitch *= mu.pitch;
        s.chord *= mu.chord;
        for p in &mut s.camber {
            p.1 *= mu.camber;
        }
        for p in &mut s.thickness {
            p.1 *= mu.thickness;
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn baseline_is_valid() {
        let b = BladeDefinition::synthetic_baseline();
        b.validate().unwrap();
        assert_eq!(b.sections.len(), 7);
        assert_eq!(b.n_blades, 6);
        assert!((b.diameter() - 1.0).abs() < 1e-15);
        let root = &b.sections[0];
        assert!((root.chord - 0.25 * 0.9).abs() < 1e-15);
        assert!((root.max_thickness() - 0.06 * root.chord).abs() < 1e-15);
    }

    #[test]
    fn identity_deformation_is_exact() {
        let b = BladeDefinition::synthetic_baseline();
        assert_eq!(deform_blade(&b, &DeformationParams::IDENTITY).unwrap(), b);
    }

    #[test]
    fn scales_chord_and_thickness() {
        let b = BladeDefinition::synthetic_baseline();
        let mu = DeformationParams::new(1.0, 0.95, 0.75, 1.27);
        let d = deform_blade(&b, &mu).unwrap();
        for (s0, s1) in b.sections.iter().zip(&d.sections) {
            assert_eq!(s1.chord, s0.chord * 0.75);
            assert_eq!(s1.pitch, s0.pitch);
            assert_eq!(s1.radius_fraction, s0.radius_fraction);
            for (t0, t1) in s0.thickness.iter().zip(&s1.thickness) {
                assert_eq!(t1.0, t0.0);
                assert_eq!(t1.1, t0.1 * 1.27);
            }
            for (c0, c1) in s0.camber.iter().zip(&s1.camber) {
                assert_eq!(c1.1, c0.1 * 0.95);
            }
        }
    }

    #[test]
    fn three_station_thickness_scaling() {
        let mut b = BladeDefinition::synthetic_baseline();
        let t = 0.01;
        for s in &mut b.sections {
            s.thickness = vec![(0.0, 0.0), (0.5, t), (1.0, 0.0)];
        }
        let d = deform_blade(&b, &DeformationParams::new(1.0, 1.0, 1.0, 1.3)).unwrap();
        assert_eq!(
            d.sections[2].thickness,
            vec![(0.0, 0.0), (0.5, 1.3 * t), (1.0, 0.0)]
        );
    }

    #[test]
    fn rejects_non_positive_factor() {
        let b = BladeDefinition::synthetic_baseline();
        for mu in [
            DeformationParams::new(0.0, 1.0, 1.0, 1.0),
            DeformationParams::new(1.0, -1.0, 1.0, 1.0),
            DeformationParams::new(1.0, 1.0, f64::NAN, 1.0),
        ] {
            assert!(matches!(
                deform_blade(&b, &mu),
                Err(Error::InvalidParameter(_))
            ));
        }
    }

    #[test]
    fn box_corners_are_cartesian_product() {
        let pb = ParameterBox::default();
        let c = pb.corners();
        assert_eq!(c.len(), 16);
        for (i, a) in c.iter().enumerate() {
            for b in &c[i + 1..] {
                assert_ne!(a, b);
            }
            for (k, v) in a.to_array().iter().enumerate() {
                assert!(*v == pb.lower[k] || *v == pb.upper[k]);
            }
        }
    }

    #[test]
    fn invalid_blades_rejected() {
        let mut b = BladeDefinition::synthetic_baseline();
        b.sections.truncate(3);
        assert!(b.validate().is_err());
        let mut b = BladeDefinition::synthetic_baseline();
        b.sections[1].thickness[3].1 = -1e-3;
        assert!(b.validate().is_err());
        let mut b = BladeDefinition::synthetic_baseline();
        b.sections[1].camber[0].0 = 0.01;
        assert!(b.validate().is_err());
        let mut b = BladeDefinition::synthetic_baseline();
        b.hub_radius = 0.6;
        assert!(b.validate().is_err());
    }

    proptest! {
        #[test]
        fn deformation_composes_multiplicatively(
            a in proptest::array::uniform4(0.5f64..1.5),
            b in proptest::array::uniform4(0.5f64..1.5),
        ) {
            let blade = BladeDefinition::synthetic_baseline();
            let (m1, m2) = (DeformationParams::from_array(a), DeformationParams::from_array(b));
            let twice = deform_blade(&deform_blade(&blade, &m1).unwrap(), &m2).unwrap();
            let once = deform_blade(&blade, &m1.compose(m2)).unwrap();
            for (s, t) in twice.sections.iter().zip(&once.sections) {
                prop_assert!((s.pitch - t.pitch).abs() <= 1e-12 * t.pitch);
                prop_assert!((s.chord - t.chord).abs() <= 1e-12 * t.chord);
                for (x, y) in s.thickness.iter().zip(&t.thickness) {
                    prop_assert!((x.1 - y.1).abs() <= 1e-12 * y.1.abs().max(1e-300));
                }
                for (x, y) in s.camber.iter().zip(&t.camber) {
                    prop_assert!((x.1 - y.1).abs() <= 1e-12 * y.1.abs().max(1e-300));
                }
            }
        }

        #[test]
        fn normalize_roundtrip(z in proptest::array::uniform4(0.0f64..1.0)) {
            let pb = ParameterBox::default();
            let mu = pb.denormalize(&z);
            prop_assert!(pb.contains(&mu));
            let back = pb.normalize(&mu);
            for i in 0..4 {
                prop_assert!((back[i] - z[i]).abs() < 1e-12);
            }
        }
    }
}
