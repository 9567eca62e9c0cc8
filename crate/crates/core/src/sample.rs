//! Test-set sizing for expert labeling.

use alloc::string::ToString;

use crate::CoreError;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SampleSizeRequest {
    /// Two-sided confidence level in (0, 1).
    pub confidence: f64,
    /// Margin of error in (0, 0.5].
    pub margin: f64,
    /// Expected proportion in (0, 1).
    pub proportion: f64,
}

impl SampleSizeRequest {
    pub fn new(confidence: f64, margin: f64, proportion: f64) -> Result<Self, CoreError> {
        let out_of_range = |field, value: f64| CoreError::OutOfRange {
            field,
            value: value.to_string(),
        };
        if !(confidence > 0.0 && confidence < 1.0) {
            return Err(out_of_range("confidence", confidence));
        }
        if !(margin > 0.0 && margin <= 0.5) {
            return Err(out_of_range("margin", margin));
        }
        if !(proportion > 0.0 && proportion < 1.0) {
            return Err(out_of_range("proportion", proportion));
        }
        Ok(SampleSizeRequest {
            confidence,
            margin,
            proportion,
        })
    }

    pub fn with_default_proportion(confidence: f64, margin: f64) -> Result<Self, CoreError> {
        SampleSizeRequest::new(confidence, margin, 0.5)
    }
}

/// Inverse of the standard normal CDF, for `p` in (0, 1).
pub fn normal_quantile(p: f64) -> f64 {
    const A: [f64; 6] = [
        -3.969_683_028_665_376e1,
        2.209_460_984_245_205e2,
        -2.759_285_104_469_687e2,
        1.383_577_518_672_69e2,
        -3.066_479_806_614_716e1,
        2.506_628_277_459_239,
    ];
    const B: [f64; 5] = [
        -5.447_609_879_822_406e1,
        1.615_858_368_580_409e2,
        -1.556_989_798_598_866e2,
        6.680_131_188_771_972e1,
        -1.328_068_155_288_572e1,
    ];
    const C: [f64; 6] = [
        -7.784_894_002_430_293e-3,
        -3.223_964_580_411_365e-1,
        -2.400_758_277_161_838,
        -2.549_732_539_343_734,
        4.374_664_141_464_968,
        2.938_163_982_698_783,
    ];
    const D: [f64; 4] = [
        7.784_695_709_041_462e-3,
        3.224_671_290_700_398e-1,
        2.445_134_137_142_996,
        3.754_408_661_907_416,
    ];
    const P_LOW: f64 = 0.02425;

    let tail = |q: f64| {
        let q = libm::sqrt(-2.0 * libm::log(q));
        (((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    };
    let x = if p < P_LOW {
        tail(p)
    } else if p > 1.0 - P_LOW {
        -tail(1.0 - p)
    } else {
        let q = p - 0.5;
        let r = q * q;
        (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * q
            / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    };

    // One Halley step against the exact CDF.
    let e = 0.5 * libm::erfc(-x / core::f64::consts::SQRT_2) - p;
    let u = e * libm::sqrt(2.0 * core::f64::consts::PI) * libm::exp(x * x / 2.0);
    x - u / (1.0 + x * u / 2.0)
}

/// Two-sided critical value for a confidence level.
pub fn z_critical(confidence: f64) -> f64 {
    normal_quantile(1.0 - (1.0 - confidence) / 2.0)
}

/// Number of labeled queries needed to estimate a proportion within the
/// requested margin.
pub fn required_sample_size(req: &SampleSizeRequest) -> u64 {
    let z = z_critical(req.confidence);
    let p = req.proportion;
    let n = z * z * p * (1.0 - p) / (req.margin * req.margin);
    // Guard against 384.0000000001-style float noise pushing n up by one.
    let n = libm::ceil(n - 1e-9);
    (n as u64).max(1)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn n(c: f64, e: f64, p: f64) -> u64 {
        required_sample_size(&SampleSizeRequest::new(c, e, p).unwrap())
    }

    #[test]
    fn quantile_known_values() {
        assert!((z_critical(0.95) - 1.959_963_984_540_054).abs() < 1e-12);
        assert!((normal_quantile(0.5)).abs() < 1e-15);
        assert!((normal_quantile(0.001) + 3.090_232_306_167_813_5).abs() < 1e-10);
    }

    #[test]
    fn textbook_sizes() {
        assert_eq!(n(0.95, 0.05, 0.5), 385);
        assert_eq!(n(0.95, 0.05, 0.1), 139);
        assert_eq!(n(0.95, 0.10, 0.5), 97);
        assert_eq!(n(0.99, 0.05, 0.5), 664);
    }

    #[test]
    fn invalid_requests() {
        assert!(SampleSizeRequest::new(1.0, 0.05, 0.5).is_err());
        assert!(SampleSizeRequest::new(0.95, 0.0, 0.5).is_err());
        assert!(SampleSizeRequest::new(0.95, 0.6, 0.5).is_err());
        assert!(SampleSizeRequest::new(0.95, 0.05, 1.0).is_err());
        assert!(SampleSizeRequest::new(f64::NAN, 0.05, 0.5).is_err());
        assert_eq!(
            SampleSizeRequest::with_default_proportion(0.9, 0.1)
                .unwrap()
                .proportion,
            0.5
        );
    }
}
