use crate::geometry::NormalMap;
use crate::metrics::AngularErrorMap;

/// Errors at or above this angle saturate the ramp.
pub const ERROR_RAMP_MAX_DEG: f64 = 30.0;

/// Viridis samples at `0, 1/8, …, 1`; intermediate values interpolate
/// linearly in RGB.
pub const VIRIDIS_STOPS: [[u8; 3]; 9] = [
    [68, 1, 84],
    [71, 44, 122],
    [59, 81, 139],
    [44, 113, 142],
    [33, 144, 141],
    [39, 173, 129],
    [92, 200, 99],
    [170, 220, 50],
    [253, 231, 37],
];

fn ramp(t: f64) -> [u8; 3] {
    let t = t.clamp(0.0, 1.0) * (VIRIDIS_STOPS.len() - 1) as f64;
    let i = (t.floor() as usize).min(VIRIDIS_STOPS.len() - 2);
    let f = t - i as f64;
    let (a, b) = (VIRIDIS_STOPS[i], VIRIDIS_STOPS[i + 1]);
    std::array::from_fn(|c| (a[c] as f64 + f * (b[c] as f64 - a[c] as f64)).round() as u8)
}

/// 8-bit RGB rendering of an error map over `[0°, 30°]`; invalid pixels are
/// black.
pub fn error_colormap(map: &AngularErrorMap) -> Vec<u8> {
    map.values()
        .iter()
        .zip(map.mask())
        .flat_map(|(&e, &ok)| if ok { ramp(e / ERROR_RAMP_MAX_DEG) } else { [0; 3] })
        .collect()
}

/// 8-bit RGB preview of a normal map, `(n + 1) / 2 · 255`; invalid is black.
pub fn normal_to_rgb8(normals: &NormalMap) -> Vec<u8> {
    normals
        .values()
        .iter()
        .zip(normals.mask())
        .flat_map(|(n, &ok)| {
            if ok {
                [n.x, n.y, n.z].map(|c| ((c + 1.0) * 0.5 * 255.0).round().clamp(0.0, 255.0) as u8)
            } else {
                [0; 3]
            }
        })
        .collect()
}
