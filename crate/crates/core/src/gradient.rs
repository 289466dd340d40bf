//! Inverse-depth gradients by 3×3 stencil filtering.
//!
//! Every kernel is normalized to unit slope: on `1/z = a + b·u + c·v` it
//! returns exactly `(b, c)`. Pixels whose stencil footprint leaves the image
//! or touches an invalid pixel are invalid; there is no border padding.

use std::fmt;
use std::ops::Deref;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{InverseDepthImage, MaskedImage};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GradientKernel {
    #[default]
    Central,
    Sobel,
    Prewitt,
}

/// One tap of a stencil: pixel offset and the weights it contributes to the
/// horizontal and vertical responses.
#[derive(Clone, Copy, Debug)]
pub(crate) struct Tap {
    pub du: isize,
    pub dv: isize,
    pub wu: f64,
    pub wv: f64,
}

impl GradientKernel {
    pub const ALL: [GradientKernel; 3] = [Self::Central, Self::Sobel, Self::Prewitt];

    pub fn name(self) -> &'static str {
        match self {
            Self::Central => "central",
            Self::Sobel => "sobel",
            Self::Prewitt => "prewitt",
        }
    }

    /// Half-width of the footprint in pixels.
    pub fn radius(self) -> usize {
        1
    }

    /// Horizontal stencil, indexed `[dv + 1][du + 1]`. The vertical stencil is
    /// its transpose.
    pub fn horizontal(self) -> [[f64; 3]; 3] {
        match self {
            Self::Central => [[0.0, 0.0, 0.0], [-0.5, 0.0, 0.5], [0.0, 0.0, 0.0]],
            Self::Sobel => {
                let s = 1.0 / 8.0;
                [[-s, 0.0, s], [-2.0 * s, 0.0, 2.0 * s], [-s, 0.0, s]]
            }
            Self::Prewitt => {
                let s = 1.0 / 6.0;
                [[-s, 0.0, s], [-s, 0.0, s], [-s, 0.0, s]]
            }
        }
    }

    pub fn vertical(self) -> [[f64; 3]; 3] {
        let h = self.horizontal();
        let mut out = [[0.0; 3]; 3];
        for (r, row) in out.iter_mut().enumerate() {
            for (c, w) in row.iter_mut().enumerate() {
                *w = h[c][r];
            }
        }
        out
    }

    /// Footprint taps: every offset carrying a nonzero weight in either
    /// stencil, plus the center pixel.
    pub(crate) fn taps(self) -> Vec<Tap> {
        let h = self.horizontal();
        let v = self.vertical();
        let mut taps = Vec::with_capacity(9);
        for r in 0..3 {
            for c in 0..3 {
                let (wu, wv) = (h[r][c], v[r][c]);
                if wu != 0.0 || wv != 0.0 || (r == 1 && c == 1) {
                    taps.push(Tap {
                        du: c as isize - 1,
                        dv: r as isize - 1,
                        wu,
                        wv,
                    });
                }
            }
        }
        taps
    }
}

impl fmt::Display for GradientKernel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for GradientKernel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "central" | "central-difference" => Ok(Self::Central),
            "sobel" => Ok(Self::Sobel),
            "prewitt" => Ok(Self::Prewitt),
            _ => Err(Error::InvalidInput(format!(
                "unknown gradient kernel '{s}' (expected central, sobel or prewitt)"
            ))),
        }
    }
}

/// Per-pixel `(∂(1/z)/∂u, ∂(1/z)/∂v)`.
#[derive(Clone, Debug, PartialEq)]
pub struct GradientField(MaskedImage<[f64; 2]>);

impl GradientField {
    pub fn as_masked(&self) -> &MaskedImage<[f64; 2]> {
        &self.0
    }
}

impl Deref for GradientField {
    type Target = MaskedImage<[f64; 2]>;

    fn deref(&self) -> &MaskedImage<[f64; 2]> {
        &self.0
    }
}

pub fn compute_gradients(img: &InverseDepthImage, kernel: GradientKernel) -> Result<GradientField> {
    let (w, h) = img.dims();
    let extent = 2 * kernel.radius() + 1;
    if w < extent || h < extent {
        return Err(Error::InvalidInput(format!(
            "{w}x{h} image is smaller than the {extent}x{extent} {kernel} stencil"
        )));
    }
    let taps = kernel.taps();
    let r = kernel.radius();
    let src = img.values();
    let mask = img.mask();

    let mut values = vec![[0.0; 2]; w * h];
    let mut valid = vec![false; w * h];
    values
        .par_chunks_mut(w)
        .zip(valid.par_chunks_mut(w))
        .enumerate()
        .filter(|(v, _)| *v >= r && *v + r < h)
        .for_each(|(v, (row, row_valid))| {
            for u in r..w - r {
                let mut gu = 0.0;
                let mut gv = 0.0;
                let mut ok = true;
                for t in &taps {
                    let i = (v as isize + t.dv) as usize * w + (u as isize + t.du) as usize;
                    if !mask[i] {
                        ok = false;
                        break;
                    }
                    gu += t.wu * src[i];
                    gv += t.wv * src[i];
                }
                if ok {
                    row[u] = [gu, gv];
                    row_valid[u] = true;
                }
            }
        });
    Ok(GradientField(MaskedImage::new(w, h, values, valid)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::InverseDepthImage;
    use proptest::prelude::*;

    fn ramp(w: usize, h: usize, f: impl Fn(f64, f64) -> f64) -> InverseDepthImage {
        InverseDepthImage::from_fn(w, h, |u, v| Some(f(u as f64, v as f64)))
    }

    #[test]
    fn stencils_sum_to_zero_and_have_unit_slope() {
        for k in GradientKernel::ALL {
            for st in [k.horizontal(), k.vertical()] {
                let sum: f64 = st.iter().flatten().sum();
                assert!(sum.abs() < 1e-15, "{k}: {sum}");
            }
            let h = k.horizontal();
            let slope: f64 = (0..3)
                .flat_map(|r| (0..3).map(move |c| (r, c)))
                .map(|(r, c)| h[r][c] * (c as f64 - 1.0))
                .sum();
            assert!((slope - 1.0).abs() < 1e-15, "{k}");
        }
    }

    #[test]
    fn affine_ramp_is_exact_for_every_kernel() {
        let img = ramp(12, 9, |u, _| 0.1 + 0.002 * u);
        for k in GradientKernel::ALL {
            let g = compute_gradients(&img, k).unwrap();
            for v in 1..8 {
                for u in 1..11 {
                    let [gu, gv] = g.get(u, v).unwrap();
                    assert!((gu - 0.002).abs() < 1e-16, "{k} {gu}");
                    assert!(gv.abs() < 1e-16, "{k} {gv}");
                }
            }
        }
    }

    #[test]
    fn constant_field_has_zero_gradient() {
        let img = ramp(5, 5, |_, _| 0.25);
        let g = compute_gradients(&img, GradientKernel::Sobel).unwrap();
        assert_eq!(g.valid_count(), 9);
        for v in 1..4 {
            for u in 1..4 {
                assert_eq!(g.get(u, v), Some([0.0, 0.0]));
            }
        }
    }

    #[test]
    fn border_pixels_are_invalid() {
        let img = ramp(6, 4, |u, v| 1.0 + u + v);
        let g = compute_gradients(&img, GradientKernel::Central).unwrap();
        for v in 0..4 {
            for u in 0..6 {
                let interior = (1..=4).contains(&u) && (1..=2).contains(&v);
                assert_eq!(g.is_valid(u, v), interior, "({u},{v})");
            }
        }
    }

    #[test]
    fn too_small_image_is_rejected() {
        let img = ramp(2, 5, |_, _| 1.0);
        assert!(compute_gradients(&img, GradientKernel::Central).is_err());
    }

    #[test]
    fn quadratic_matches_symbolic_derivative() {
        // 1/z = 0.2 + 1e-3 u + 1e-6 u^2; central difference is exact on
        // quadratics, the symbolic derivative is 1e-3 + 2e-6 u.
        let img = ramp(40, 5, |u, _| 0.2 + 1e-3 * u + 1e-6 * u * u);
        let g = compute_gradients(&img, GradientKernel::Central).unwrap();
        for u in 1..39 {
            let [gu, _] = g.get(u, 2).unwrap();
            let oracle = 1e-3 + 2e-6 * u as f64;
            assert!((gu - oracle).abs() < 1e-6, "u={u}: {gu} vs {oracle}");
        }
    }

    #[test]
    fn mask_is_eroded_by_footprint() {
        let mut img_vals = vec![1.0; 49];
        let mut valid = vec![true; 49];
        valid[3 * 7 + 3] = false;
        img_vals[3 * 7 + 3] = 0.0;
        let img = InverseDepthImage::new(7, 7, img_vals, valid).unwrap();
        for k in GradientKernel::ALL {
            let g = compute_gradients(&img, k).unwrap();
            let taps = k.taps();
            for v in 1..6usize {
                for u in 1..6usize {
                    let touches = taps
                        .iter()
                        .any(|t| (u as isize + t.du, v as isize + t.dv) == (3, 3));
                    assert_eq!(g.is_valid(u, v), !touches, "{k} ({u},{v})");
                }
            }
        }
    }

    #[test]
    fn kernel_names_round_trip() {
        for k in GradientKernel::ALL {
            assert_eq!(k.name().parse::<GradientKernel>().unwrap(), k);
        }
        assert!("laplace".parse::<GradientKernel>().is_err());
    }

    proptest! {
        #[test]
        fn gradients_are_linear(
            seed_a in proptest::collection::vec(0.1..2.0f64, 36),
            seed_b in proptest::collection::vec(0.1..2.0f64, 36),
            a in 0.1..3.0f64,
            b in 0.1..3.0f64,
        ) {
            let ia = InverseDepthImage::from_values(6, 6, seed_a.clone()).unwrap();
            let ib = InverseDepthImage::from_values(6, 6, seed_b.clone()).unwrap();
            let mix: Vec<f64> = seed_a.iter().zip(&seed_b).map(|(x, y)| a * x + b * y).collect();
            let im = InverseDepthImage::from_values(6, 6, mix).unwrap();
            for k in GradientKernel::ALL {
                let (ga, gb, gm) = (
                    compute_gradients(&ia, k).unwrap(),
                    compute_gradients(&ib, k).unwrap(),
                    compute_gradients(&im, k).unwrap(),
                );
                for v in 0..6 {
                    for u in 0..6 {
                        if let (Some(x), Some(y), Some(m)) = (ga.get(u, v), gb.get(u, v), gm.get(u, v)) {
                            for c in 0..2 {
                                prop_assert!((a * x[c] + b * y[c] - m[c]).abs() < 1e-12);
                            }
                        }
                    }
                }
            }
        }

        #[test]
        fn kernels_agree_on_affine_fields(c0 in 0.5..2.0f64, cu in -0.01..0.01f64, cv in -0.01..0.01f64) {
            let img = ramp(8, 8, |u, v| c0 + cu * u + cv * v);
            let fields: Vec<_> = GradientKernel::ALL.iter().map(|&k| compute_gradients(&img, k).unwrap()).collect();
            for v in 1..7 {
                for u in 1..7 {
                    let g0 = fields[0].get(u, v).unwrap();
                    for f in &fields[1..] {
                        let g = f.get(u, v).unwrap();
                        prop_assert!((g[0] - g0[0]).abs() < 1e-15 && (g[1] - g0[1]).abs() < 1e-15);
                    }
                }
            }
        }
    }
}
