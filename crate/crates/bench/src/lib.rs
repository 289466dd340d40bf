//! Shared fixtures for the benchmarks.

use normalis_core::synthetic::{add_noise, render_depth, NoiseSpec, Plane, SceneSpec, Sphere};
use normalis_core::{CameraIntrinsics, DepthImage, Vector3};

/// Driving-camera intrinsics at 1242×375.
pub fn kitti_camera() -> CameraIntrinsics {
    CameraIntrinsics::new(721.5377, 721.5377, 609.5593, 172.854, 1242, 375).expect("valid intrinsics")
}

/// Road plane 1.65 m below the camera seen by [`kitti_camera`], with 0.5 %
/// depth noise so no pixel hits the frontoparallel shortcut.
pub fn road_scene() -> (DepthImage, CameraIntrinsics) {
    let k = kitti_camera();
    let road = SceneSpec::Plane(Plane::through(Vector3::new(0.0, -1.0, -0.02), Vector3::new(0.0, 1.65, 10.0)));
    let depth = render_depth(&road, &k).expect("road is visible");
    let depth = add_noise(&depth, &NoiseSpec::relative(0.005, 1)).expect("valid noise");
    (depth, k)
}

/// A sphere filling most of a `size`×`size` view.
pub fn sphere_scene(size: usize) -> (DepthImage, CameraIntrinsics) {
    let k = CameraIntrinsics::centered(size as f64, size, size).expect("valid intrinsics");
    let scene = SceneSpec::Sphere(Sphere {
        center: Vector3::new(0.0, 0.0, 4.0),
        radius: 1.8,
    });
    (render_depth(&scene, &k).expect("sphere is visible"), k)
}
