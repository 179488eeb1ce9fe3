use num_rational::Rational64;
use serde::Serialize;

use crate::error::{Error, Result};

/// Axis-aligned rectangle `[x0, x1] × [y0, y1]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Rect {
    pub x0: Rational64,
    pub y0: Rational64,
    pub x1: Rational64,
    pub y1: Rational64,
}

impl Rect {
    pub fn new(x0: Rational64, y0: Rational64, x1: Rational64, y1: Rational64) -> Self {
        Self { x0, y0, x1, y1 }
    }
}

/// Horizontal or vertical segment.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Segment {
    pub start: (Rational64, Rational64),
    pub end: (Rational64, Rational64),
}

impl Segment {
    pub fn horizontal(y: Rational64, x0: Rational64, x1: Rational64) -> Self {
        Self {
            start: (x0, y),
            end: (x1, y),
        }
    }

    pub fn vertical(x: Rational64, y0: Rational64, y1: Rational64) -> Self {
        Self {
            start: (x, y0),
            end: (x, y1),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum BoundaryLabel {
    Potential0,
    Potential1,
    Insulated,
}

impl BoundaryLabel {
    pub fn potential(self) -> Option<f64> {
        match self {
            BoundaryLabel::Potential0 => Some(0.0),
            BoundaryLabel::Potential1 => Some(1.0),
            BoundaryLabel::Insulated => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LabeledSegment {
    pub segment: Segment,
    pub label: BoundaryLabel,
}

/// Geometry and boundary data of one condenser problem.
///
/// The region is the union of `rects`; `slits` are interior cuts with a
/// separate trace on each side. Boundary parts not covered by a labeled
/// segment are insulated.
#[derive(Debug, Clone, PartialEq)]
pub struct Layout {
    pub rects: Vec<Rect>,
    pub slits: Vec<Segment>,
    pub segments: Vec<LabeledSegment>,
    /// Number of congruent copies of this region making up the full domain.
    pub copies: u32,
}

/// Which side pair of a quadrilateral carries the potentials.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SidePairing {
    /// The vertical sides.
    #[default]
    Primary,
    /// The complementary pair.
    Dual,
}

/// How much of the frame is meshed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum RingCut {
    /// The quarter `x, y ≥ 0` with insulated symmetry lines.
    #[default]
    Quarter,
    Full,
}

/// Rectilinear domains understood by the oracle. Lengths are exact
/// rationals so node alignment can be checked exactly.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RectilinearDomain {
    /// `[-H,H]×[-1,1] \ [-σH,σH]×[-σ,σ]`.
    RingFrame { sigma: Rational64, h: Rational64 },
    /// `[0,w]×[0,h]`.
    QuadRect {
        width: Rational64,
        height: Rational64,
    },
    /// `[0,H]×[0,1]` with vertices `cH, H, H+i, i`.
    QuadSlit { c: Rational64, h: Rational64 },
    /// Unit square with slits `y = j/n`, `0 ≤ x ≤ c`, vertices `c, 1, 1+i, c+i`.
    QuadSlittedSquare { c: Rational64, n: u32 },
}

fn r(v: i64) -> Rational64 {
    Rational64::from_integer(v)
}

fn open_unit(name: &str, v: Rational64) -> Result<()> {
    if v > r(0) && v < r(1) {
        Ok(())
    } else {
        Err(Error::Domain(format!("{name} must lie in (0, 1), got {v}")))
    }
}

impl RectilinearDomain {
    pub fn ring_frame(sigma: Rational64, h: Rational64) -> Result<Self> {
        open_unit("sigma", sigma)?;
        if h < r(1) {
            return Err(Error::Domain(format!("H must be ≥ 1, got {h}")));
        }
        Ok(Self::RingFrame { sigma, h })
    }

    pub fn quad_rect(width: Rational64, height: Rational64) -> Result<Self> {
        if width <= r(0) || height <= r(0) {
            return Err(Error::Domain(format!(
                "rectangle sides must be positive, got {width} × {height}"
            )));
        }
        Ok(Self::QuadRect { width, height })
    }

    pub fn quad_slit(c: Rational64, h: Rational64) -> Result<Self> {
        open_unit("c", c)?;
        if h < r(1) {
            return Err(Error::Domain(format!("H must be ≥ 1, got {h}")));
        }
        Ok(Self::QuadSlit { c, h })
    }

    pub fn quad_slitted_square(c: Rational64, n: u32) -> Result<Self> {
        open_unit("c", c)?;
        if n == 0 {
            return Err(Error::Domain("n must be positive".into()));
        }
        Ok(Self::QuadSlittedSquare { c, n })
    }

    pub fn is_ring(&self) -> bool {
        matches!(self, Self::RingFrame { .. })
    }

    pub fn name(&self) -> String {
        match self {
            Self::RingFrame { sigma, h } => format!("ring_frame(sigma={sigma}, H={h})"),
            Self::QuadRect { width, height } => format!("quad_rect({width}, {height})"),
            Self::QuadSlit { c, h } => format!("quad_slit(c={c}, H={h})"),
            Self::QuadSlittedSquare { c, n } => format!("quad_slitted_square(c={c}, n={n})"),
        }
    }

    /// Layout of a ring frame; fails for quadrilaterals.
    pub fn ring_layout(&self, cut: RingCut) -> Result<Layout> {
        let Self::RingFrame { sigma, h } = *self else {
            return Err(Error::Domain(format!(
                "{} is not a ring domain",
                self.name()
            )));
        };
        let p0 = BoundaryLabel::Potential0;
        let p1 = BoundaryLabel::Potential1;
        let (one, zero) = (r(1), r(0));
        let sh = sigma * h;
        Ok(match cut {
            RingCut::Quarter => Layout {
                rects: vec![
                    Rect::new(zero, sigma, h, one),
                    Rect::new(sh, zero, h, sigma),
                ],
                slits: vec![],
                segments: vec![
                    LabeledSegment {
                        segment: Segment::vertical(h, zero, one),
                        label: p0,
                    },
                    LabeledSegment {
                        segment: Segment::horizontal(one, zero, h),
                        label: p0,
                    },
                    LabeledSegment {
                        segment: Segment::horizontal(sigma, zero, sh),
                        label: p1,
                    },
                    LabeledSegment {
                        segment: Segment::vertical(sh, zero, sigma),
                        label: p1,
                    },
                ],
                copies: 4,
            },
            RingCut::Full => Layout {
                rects: vec![
                    Rect::new(-h, -one, h, -sigma),
                    Rect::new(-h, sigma, h, one),
                    Rect::new(-h, -sigma, -sh, sigma),
                    Rect::new(sh, -sigma, h, sigma),
                ],
                slits: vec![],
                segments: vec![
                    LabeledSegment {
                        segment: Segment::vertical(-h, -one, one),
                        label: p0,
                    },
                    LabeledSegment {
                        segment: Segment::vertical(h, -one, one),
                        label: p0,
                    },
                    LabeledSegment {
                        segment: Segment::horizontal(-one, -h, h),
                        label: p0,
                    },
                    LabeledSegment {
                        segment: Segment::horizontal(one, -h, h),
                        label: p0,
                    },
                    LabeledSegment {
                        segment: Segment::vertical(-sh, -sigma, sigma),
                        label: p1,
                    },
                    LabeledSegment {
                        segment: Segment::vertical(sh, -sigma, sigma),
                        label: p1,
                    },
                    LabeledSegment {
                        segment: Segment::horizontal(-sigma, -sh, sh),
                        label: p1,
                    },
                    LabeledSegment {
                        segment: Segment::horizontal(sigma, -sh, sh),
                        label: p1,
                    },
                ],
                copies: 1,
            },
        })
    }

    /// Layout of a quadrilateral; fails for ring frames.
    pub fn quad_layout(&self, pairing: SidePairing) -> Result<Layout> {
        let (zero, one) = (r(0), r(1));
        let (first, second, rect, slits) = match *self {
            Self::RingFrame { .. } => {
                return Err(Error::Domain(format!(
                    "{} is not a quadrilateral",
                    self.name()
                )));
            }
            Self::QuadRect { width, height } => {
                let (a, b) = match pairing {
                    SidePairing::Primary => (
                        vec![Segment::vertical(zero, zero, height)],
                        vec![Segment::vertical(width, zero, height)],
                    ),
                    SidePairing::Dual => (
                        vec![Segment::horizontal(zero, zero, width)],
                        vec![Segment::horizontal(height, zero, width)],
                    ),
                };
                (a, b, Rect::new(zero, zero, width, height), vec![])
            }
            Self::QuadSlit { c, h } => {
                let ch = c * h;
                let (a, b) = match pairing {
                    SidePairing::Primary => (
                        vec![
                            Segment::vertical(zero, zero, one),
                            Segment::horizontal(zero, zero, ch),
                        ],
                        vec![Segment::vertical(h, zero, one)],
                    ),
                    SidePairing::Dual => (
                        vec![Segment::horizontal(zero, ch, h)],
                        vec![Segment::horizontal(one, zero, h)],
                    ),
                };
                (a, b, Rect::new(zero, zero, h, one), vec![])
            }
            Self::QuadSlittedSquare { c, n } => {
                let n = i64::from(n);
                let cuts: Vec<Segment> = (1..n)
                    .map(|j| Segment::horizontal(Rational64::new(j, n), zero, c))
                    .collect();
                let (a, b) = match pairing {
                    SidePairing::Primary => {
                        let mut a = vec![
                            Segment::vertical(zero, zero, one),
                            Segment::horizontal(zero, zero, c),
                            Segment::horizontal(one, zero, c),
                        ];
                        a.extend(cuts.iter().copied());
                        (a, vec![Segment::vertical(one, zero, one)])
                    }
                    SidePairing::Dual => (
                        vec![Segment::horizontal(zero, c, one)],
                        vec![Segment::horizontal(one, c, one)],
                    ),
                };
                (a, b, Rect::new(zero, zero, one, one), cuts)
            }
        };
        let label = |label| move |segment| LabeledSegment { segment, label };
        let mut segments: Vec<LabeledSegment> = first
            .into_iter()
            .map(label(BoundaryLabel::Potential0))
            .collect();
        segments.extend(second.into_iter().map(label(BoundaryLabel::Potential1)));
        Ok(Layout {
            rects: vec![rect],
            slits,
            segments,
            copies: 1,
        })
    }

    /// The quarter ring or the primary quadrilateral.
    pub fn default_layout(&self) -> Result<Layout> {
        if self.is_ring() {
            self.ring_layout(RingCut::Quarter)
        } else {
            self.quad_layout(SidePairing::Primary)
        }
    }
}
