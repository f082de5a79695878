//! Array element layouts in free-space wavelength units.
//!
//! Built-in layouts are single rows along the x axis. The 3-D variant lifts
//! every odd element by a height difference `h` along z, so neighbours sit on
//! two alternating levels above a common reflector.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Vec3 = [f64; 3];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LayoutTag {
    Planar2d,
    Alternating3d,
    Custom,
}

/// Element positions in units of λ0, in construction (x-ascending) order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "GeometryDoc", into = "GeometryDoc")]
pub struct ArrayGeometry {
    elements: Vec<Vec3>,
    layout: LayoutTag,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct GeometryDoc {
    elements: Vec<Vec3>,
    layout: LayoutTag,
}

impl TryFrom<GeometryDoc> for ArrayGeometry {
    type Error = Error;

    fn try_from(doc: GeometryDoc) -> Result<Self> {
        ArrayGeometry::new(doc.elements, doc.layout)
    }
}

impl From<ArrayGeometry> for GeometryDoc {
    fn from(g: ArrayGeometry) -> Self {
        GeometryDoc {
            elements: g.elements,
            layout: g.layout,
        }
    }
}

const Z_TOL: f64 = 1e-12;

impl ArrayGeometry {
    pub fn new(elements: Vec<Vec3>, layout: LayoutTag) -> Result<Self> {
        if elements.is_empty() {
            return Err(Error::invalid("geometry needs at least one element"));
        }
        if elements.iter().flatten().any(|c| !c.is_finite()) {
            return Err(Error::invalid("element coordinates must be finite"));
        }
        let z0 = elements[0][2];
        match layout {
            LayoutTag::Planar2d => {
                if elements.iter().any(|e| (e[2] - z0).abs() > Z_TOL) {
                    return Err(Error::invalid(
                        "planar2d layout requires equal z coordinates",
                    ));
                }
            }
            LayoutTag::Alternating3d => {
                let z1 = elements.get(1).map_or(z0, |e| e[2]);
                for (i, e) in elements.iter().enumerate() {
                    let expect = if i % 2 == 0 { z0 } else { z1 };
                    if (e[2] - expect).abs() > Z_TOL {
                        return Err(Error::invalid(format!(
                            "alternating3d layout: element {i} has z={} but expected {expect}",
                            e[2]
                        )));
                    }
                }
            }
            LayoutTag::Custom => {}
        }
        Ok(Self { elements, layout })
    }

    /// `n` elements at `(i·spacing, 0, 0)`.
    pub fn linear_2d(n: usize, spacing: f64) -> Result<Self> {
        if n == 0 {
            return Err(Error::invalid("element count must be positive"));
        }
        if !(spacing > 0.0) || !spacing.is_finite() {
            return Err(Error::invalid(format!(
                "spacing must be positive, got {spacing}"
            )));
        }
        let elements = (0..n).map(|i| [i as f64 * spacing, 0.0, 0.0]).collect();
        Ok(Self {
            elements,
            layout: LayoutTag::Planar2d,
        })
    }

    /// Element `i` at `(i·spacing, 0, h·(i mod 2))`; `h = 0` yields the 2-D row.
    pub fn linear_3d(n: usize, spacing: f64, h: f64) -> Result<Self> {
        if !(h >= 0.0) || !h.is_finite() {
            return Err(Error::invalid(format!(
                "height difference must be non-negative, got {h}"
            )));
        }
        let mut g = Self::linear_2d(n, spacing)?;
        if h == 0.0 {
            return Ok(g);
        }
        for (i, e) in g.elements.iter_mut().enumerate() {
            e[2] = h * (i % 2) as f64;
        }
        g.layout = LayoutTag::Alternating3d;
        Ok(g)
    }

    pub fn elements(&self) -> &[Vec3] {
        &self.elements
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn layout(&self) -> LayoutTag {
        self.layout
    }

    pub fn translated(&self, offset: Vec3) -> Self {
        let elements = self
            .elements
            .iter()
            .map(|e| [e[0] + offset[0], e[1] + offset[1], e[2] + offset[2]])
            .collect();
        Self {
            elements,
            layout: self.layout,
        }
    }

    /// Lowest z coordinate; the reflector plane sits a fixed distance below it.
    pub fn min_z(&self) -> f64 {
        self.elements
            .iter()
            .map(|e| e[2])
            .fold(f64::INFINITY, f64::min)
    }

    /// Extent of the array along x (the aperture length of a one-row array).
    pub fn aperture_length(&self) -> f64 {
        let (lo, hi) = self
            .elements
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), e| {
                (lo.min(e[0]), hi.max(e[0]))
            });
        hi - lo
    }

    /// Smallest in-plane (xy) distance between any two elements; infinite for one element.
    pub fn min_lateral_spacing(&self) -> f64 {
        let mut best = f64::INFINITY;
        for (i, a) in self.elements.iter().enumerate() {
            for b in &self.elements[i + 1..] {
                best = best.min((a[0] - b[0]).hypot(a[1] - b[1]));
            }
        }
        best
    }

    /// Number of elements a half-wavelength-spaced row would place on the same
    /// aperture: `floor(L / 0.5) + 1`.
    pub fn n_halfwave(&self) -> usize {
        (self.aperture_length() / 0.5 + 1e-9).floor() as usize + 1
    }

    /// Extent of the element set seen from `direction`: the largest spread of
    /// the positions projected onto the plane orthogonal to it.
    pub fn projected_length(&self, direction: Vec3) -> Result<f64> {
        let norm = (direction[0].powi(2) + direction[1].powi(2) + direction[2].powi(2)).sqrt();
        if !(norm > 0.0) || !norm.is_finite() {
            return Err(Error::invalid("direction must be a non-zero finite vector"));
        }
        if (norm - 1.0).abs() > 1e-9 {
            return Err(Error::invalid(format!(
                "direction must be normalized, |d| = {norm}"
            )));
        }
        let d = direction;
        let project = |p: &Vec3| {
            let dot = p[0] * d[0] + p[1] * d[1] + p[2] * d[2];
            [p[0] - dot * d[0], p[1] - dot * d[1], p[2] - dot * d[2]]
        };
        let projected: Vec<Vec3> = self.elements.iter().map(project).collect();
        // The maximal max-minus-min over in-plane axes is the set diameter.
        let mut best = 0.0f64;
        for (i, a) in projected.iter().enumerate() {
            for b in &projected[i + 1..] {
                let dist =
                    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2) + (a[2] - b[2]).powi(2)).sqrt();
                best = best.max(dist);
            }
        }
        Ok(best)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_element_row() {
        let g = ArrayGeometry::linear_2d(2, 0.5).unwrap();
        assert_eq!(g.elements(), &[[0.0, 0.0, 0.0], [0.5, 0.0, 0.0]]);
        assert_eq!(g.layout(), LayoutTag::Planar2d);
    }

    #[test]
    fn eleven_elements_span_five_wavelengths() {
        let g = ArrayGeometry::linear_2d(11, 0.5).unwrap();
        assert!((g.aperture_length() - 5.0).abs() < 1e-12);
        assert_eq!(g.n_halfwave(), 11);
    }

    #[test]
    fn single_element_at_origin() {
        let g = ArrayGeometry::linear_2d(1, 0.3).unwrap();
        assert_eq!(g.elements(), &[[0.0, 0.0, 0.0]]);
        assert_eq!(g.aperture_length(), 0.0);
    }

    #[test]
    fn invalid_arguments() {
        assert!(ArrayGeometry::linear_2d(0, 0.5).is_err());
        assert!(ArrayGeometry::linear_2d(3, 0.0).is_err());
        assert!(ArrayGeometry::linear_2d(3, -0.1).is_err());
        assert!(ArrayGeometry::linear_3d(3, 0.4, -0.5).is_err());
    }

    #[test]
    fn alternating_heights() {
        let g = ArrayGeometry::linear_3d(4, 0.4, 0.5).unwrap();
        let z: Vec<f64> = g.elements().iter().map(|e| e[2]).collect();
        assert_eq!(z, vec![0.0, 0.5, 0.0, 0.5]);
        assert_eq!(g.layout(), LayoutTag::Alternating3d);
    }

    #[test]
    fn zero_height_degenerates_to_row() {
        assert_eq!(
            ArrayGeometry::linear_3d(3, 0.4, 0.0).unwrap(),
            ArrayGeometry::linear_2d(3, 0.4).unwrap()
        );
    }

    #[test]
    fn twenty_five_element_3d_array() {
        let g = ArrayGeometry::linear_3d(25, 5.0 / 24.0, 0.5).unwrap();
        assert_eq!(g.len(), 25);
        assert!((g.aperture_length() - 5.0).abs() < 1e-12);
        assert_eq!(g.n_halfwave(), 11);
    }

    #[test]
    fn projection_examples() {
        let g2 = ArrayGeometry::linear_2d(2, 0.5).unwrap();
        assert!((g2.projected_length([0.0, 0.0, 1.0]).unwrap() - 0.5).abs() < 1e-15);
        assert!(g2.projected_length([1.0, 0.0, 0.0]).unwrap().abs() < 1e-15);
        let g3 = ArrayGeometry::linear_3d(2, 0.5, 0.5).unwrap();
        assert!((g3.projected_length([1.0, 0.0, 0.0]).unwrap() - 0.5).abs() < 1e-15);
        assert!(g2.projected_length([0.0, 0.0, 0.0]).is_err());
        assert!(g2.projected_length([0.0, 0.0, 2.0]).is_err());
    }

    #[test]
    fn layout_validation() {
        assert!(
            ArrayGeometry::new(vec![[0.0, 0.0, 0.0], [1.0, 0.0, 0.1]], LayoutTag::Planar2d)
                .is_err()
        );
        assert!(ArrayGeometry::new(
            vec![[0.0, 0.0, 0.0], [1.0, 0.0, 0.5], [2.0, 0.0, 0.4]],
            LayoutTag::Alternating3d
        )
        .is_err());
        assert!(ArrayGeometry::new(vec![[0.0, f64::NAN, 0.0]], LayoutTag::Custom).is_err());
        assert!(ArrayGeometry::new(vec![], LayoutTag::Custom).is_err());
    }

    #[test]
    fn json_document_shape() {
        let g = ArrayGeometry::linear_3d(2, 0.5, 0.25).unwrap();
        let text = g.to_json().unwrap();
        let v: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert_eq!(v["layout"], "alternating3d");
        assert_eq!(v["elements"][1][2], 0.25);
        assert_eq!(ArrayGeometry::from_json(&text).unwrap(), g);
        let bad = r#"{"elements": [[0,0,0],[1,0,1]], "layout": "planar2d"}"#;
        assert!(ArrayGeometry::from_json(bad).is_err());
        let unknown = r#"{"elements": [[0,0,0]], "layout": "custom", "extra": 1}"#;
        assert!(ArrayGeometry::from_json(unknown).is_err());
    }
}
