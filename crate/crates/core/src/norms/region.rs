use crate::field::GridSpec;

/// Subset of a grid, selected by cell centre.
#[derive(Debug, Clone, PartialEq)]
pub enum Region {
    All,
    Disk { center: [f64; 2], radius: f64 },
    Annulus { center: [f64; 2], r_inner: f64, r_outer: f64 },
    Rect { min: [f64; 2], max: [f64; 2] },
    /// Explicit cell mask (must match the grid it is used with).
    Mask(Vec<bool>),
}

impl Region {
    pub fn disk(center: [f64; 2], radius: f64) -> Self {
        Region::Disk { center, radius }
    }

    pub fn annulus(center: [f64; 2], r_inner: f64, r_outer: f64) -> Self {
        Region::Annulus { center, r_inner, r_outer }
    }

    pub fn contains(&self, p: [f64; 2]) -> bool {
        let d = |c: [f64; 2]| ((p[0] - c[0]).powi(2) + (p[1] - c[1]).powi(2)).sqrt();
        match self {
            Region::All => true,
            Region::Disk { center, radius } => d(*center) <= *radius,
            Region::Annulus { center, r_inner, r_outer } => {
                let r = d(*center);
                r >= *r_inner && r <= *r_outer
            }
            Region::Rect { min, max } => p[0] >= min[0] && p[0] <= max[0] && p[1] >= min[1] && p[1] <= max[1],
            Region::Mask(_) => panic!("mask regions have no geometric membership test"),
        }
    }

    pub fn mask(&self, spec: &GridSpec) -> Vec<bool> {
        match self {
            Region::Mask(m) => {
                assert_eq!(m.len(), spec.len(), "mask does not match grid");
                m.clone()
            }
            _ => {
                let mut m = Vec::with_capacity(spec.len());
                for j in 0..spec.ny {
                    for i in 0..spec.nx {
                        m.push(self.contains(spec.point(i, j)));
                    }
                }
                m
            }
        }
    }

    /// Short textual descriptor used in reports.
    pub fn describe(&self) -> String {
        match self {
            Region::All => "all".into(),
            Region::Disk { center, radius } => format!("disk({},{};{})", center[0], center[1], radius),
            Region::Annulus { center, r_inner, r_outer } => {
                format!("annulus({},{};{},{})", center[0], center[1], r_inner, r_outer)
            }
            Region::Rect { min, max } => format!("rect({},{};{},{})", min[0], min[1], max[0], max[1]),
            Region::Mask(m) => format!("mask({} cells)", m.iter().filter(|&&b| b).count()),
        }
    }

    /// Parses `all`, `disk:cx,cy,r`, `annulus:cx,cy,r0,r1`, `rect:x0,y0,x1,y1`.
    pub fn parse(s: &str) -> Option<Self> {
        let (kind, rest) = s.split_once(':').unwrap_or((s, ""));
        let nums: Option<Vec<f64>> = if rest.is_empty() {
            Some(vec![])
        } else {
            rest.split(',').map(|t| t.trim().parse().ok()).collect()
        };
        let v = nums?;
        match (kind, v.as_slice()) {
            ("all", []) => Some(Region::All),
            ("disk", [x, y, r]) if *r > 0.0 => Some(Region::disk([*x, *y], *r)),
            ("annulus", [x, y, a, b]) if *a >= 0.0 && b > a => Some(Region::annulus([*x, *y], *a, *b)),
            ("rect", [x0, y0, x1, y1]) if x1 > x0 && y1 > y0 => {
                Some(Region::Rect { min: [*x0, *y0], max: [*x1, *y1] })
            }
            _ => None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_describe() {
        assert_eq!(Region::parse("all"), Some(Region::All));
        assert_eq!(Region::parse("disk:0,0,1"), Some(Region::disk([0.0, 0.0], 1.0)));
        assert!(Region::parse("disk:0,0").is_none());
        assert!(Region::parse("annulus:0,0,2,1").is_none());
        assert_eq!(Region::parse("annulus:0,0,0.5,1").unwrap().describe(), "annulus(0,0;0.5,1)");
    }

    #[test]
    fn annulus_mask_excludes_hole() {
        let g = GridSpec::square([0.0, 0.0], 1.0, 32).unwrap();
        let m = Region::annulus([0.0, 0.0], 0.5, 1.0).mask(&g);
        let (i, j) = g.nearest([0.0, 0.0]);
        assert!(!m[g.idx(i, j)]);
        let (i, j) = g.nearest([0.7, 0.0]);
        assert!(m[g.idx(i, j)]);
    }
}
