//! Adaptive Gauss–Kronrod (G7/K15) quadrature.

use crate::scalar::Scalar;

/// Default absolute tolerance for density integrals.
pub const DEFAULT_ABS_TOL: f64 = 1e-9;
/// Default recursion depth limit.
pub const DEFAULT_MAX_DEPTH: usize = 50;

// Kronrod abscissae on [-1, 1], descending; odd indices are the Gauss points.
const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Integral<T> {
    pub value: T,
    /// Sum of the accepted |K15 - G7| estimates.
    pub error: T,
    /// True if some subinterval hit the depth limit before meeting its tolerance.
    pub depth_exhausted: bool,
}

impl<T: Scalar> Integral<T> {
    fn zero() -> Self {
        Integral {
            value: T::zero(),
            error: T::zero(),
            depth_exhausted: false,
        }
    }

    fn merge(self, other: Self) -> Self {
        Integral {
            value: self.value + other.value,
            error: self.error + other.error,
            depth_exhausted: self.depth_exhausted || other.depth_exhausted,
        }
    }
}

/// One K15 evaluation on `[a, b]`, returning `(kronrod, |kronrod - gauss|)`.
pub fn gauss_kronrod_15<T: Scalar, F: Fn(T) -> T>(f: &F, a: T, b: T) -> (T, T) {
    let half = T::lit(0.5);
    let center = half * (a + b);
    let half_len = half * (b - a);
    let fc = f(center);
    let mut kronrod = fc * T::lit(WGK[7]);
    let mut gauss = fc * T::lit(WG[3]);
    for j in 0..7 {
        let dx = half_len * T::lit(XGK[j]);
        let pair = f(center - dx) + f(center + dx);
        kronrod = kronrod + T::lit(WGK[j]) * pair;
        if j % 2 == 1 {
            gauss = gauss + T::lit(WG[j / 2]) * pair;
        }
    }
    (kronrod * half_len, ((kronrod - gauss) * half_len).abs())
}

/// Integrates `f` over `[a, b]` by recursive bisection until each piece's
/// Kronrod/Gauss discrepancy is within its share of `abs_tol`.
pub fn integrate<T, F>(f: &F, a: T, b: T, abs_tol: T, max_depth: usize) -> Integral<T>
where
    T: Scalar,
    F: Fn(T) -> T,
{
    if !(b > a) {
        return Integral::zero();
    }
    let (value, error) = gauss_kronrod_15(f, a, b);
    refine(f, a, b, value, error, abs_tol, max_depth)
}

fn refine<T, F>(f: &F, a: T, b: T, value: T, error: T, tol: T, depth: usize) -> Integral<T>
where
    T: Scalar,
    F: Fn(T) -> T,
{
    let mid = T::lit(0.5) * (a + b);
    if error <= tol || !(mid > a && mid < b) {
        return Integral {
            value,
            error,
            depth_exhausted: false,
        };
    }
    if depth == 0 {
        return Integral {
            value,
            error,
            depth_exhausted: true,
        };
    }
    let half_tol = T::lit(0.5) * tol;
    let (lv, le) = gauss_kronrod_15(f, a, mid);
    let (rv, re) = gauss_kronrod_15(f, mid, b);
    let left = refine(f, a, mid, lv, le, half_tol, depth - 1);
    let right = refine(f, mid, b, rv, re, half_tol, depth - 1);
    left.merge(right)
}

/// Integrates over consecutive `edges`, splitting `abs_tol` evenly between
/// panels. Panels let the caller pin the quadrature to where the mass is.
pub fn integrate_panels<T, F>(f: &F, edges: &[T], abs_tol: T, max_depth: usize) -> Integral<T>
where
    T: Scalar,
    F: Fn(T) -> T,
{
    if edges.len() < 2 {
        return Integral::zero();
    }
    let share = abs_tol / T::from_usize_lossy(edges.len() - 1);
    edges
        .windows(2)
        .map(|w| integrate(f, w[0], w[1], share, max_depth))
        .fold(Integral::zero(), Integral::merge)
}

/// `n + 1` equally spaced edges from `a` to `b`, with `b` exact.
pub fn uniform_edges<T: Scalar>(a: T, b: T, n: usize) -> Vec<T> {
    let n = n.max(1);
    let step = (b - a) / T::from_usize_lossy(n);
    let mut edges: Vec<T> = (0..n).map(|i| a + step * T::from_usize_lossy(i)).collect();
    edges.push(b);
    edges
}
