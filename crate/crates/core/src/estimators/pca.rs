use nalgebra::{Matrix3, SymmetricEigen, Vector3};

use crate::error::{Error, Result};
use crate::geometry::orient_toward_camera;

/// Relative eigenvalue floor below which the point set is treated as
/// collinear.
const RANK_TOL: f64 = 1e-12;

/// Unit normal of the best-fit plane through `points` (smallest principal
/// axis of their covariance), oriented toward the camera at the origin as
/// seen from the centroid.
pub fn plane_pca_normal(points: &[Vector3<f64>]) -> Result<Vector3<f64>> {
    let (centroid, normal) = pca_axis(points)?;
    orient_toward_camera(&normal, &centroid)
}

pub(crate) fn pca_axis(points: &[Vector3<f64>]) -> Result<(Vector3<f64>, Vector3<f64>)> {
    if points.len() < 3 {
        return Err(Error::Degenerate(format!(
            "plane fit needs at least 3 points, got {}",
            points.len()
        )));
    }
    let n = points.len() as f64;
    let centroid = points.iter().sum::<Vector3<f64>>() / n;
    let mut cov = Matrix3::zeros();
    for p in points {
        let d = p - centroid;
        cov += d * d.transpose();
    }
    cov /= n;
    let eig = SymmetricEigen::new(cov);
    let mut order = [0usize, 1, 2];
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let (mid, max) = (eig.eigenvalues[order[1]], eig.eigenvalues[order[2]]);
    if !(max > 0.0) || mid <= RANK_TOL * max {
        return Err(Error::Degenerate("points are collinear or coincident".into()));
    }
    Ok((centroid, eig.eigenvectors.column(order[0]).into_owned()))
}
