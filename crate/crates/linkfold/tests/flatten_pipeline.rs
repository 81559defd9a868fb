//! End-to-end flattening runs checked by the certifier.

use linkfold::certify::{certify_motion, CertifyProfile, TerminalCheck};
use linkfold::flatten::{flatten_pipeline, CenterSpec, FlattenOptions};
use linkfold::linkage::{build_shape, ShapeSpec};

fn flatten_profile(eps: f64, samples: usize) -> CertifyProfile {
    CertifyProfile::new(eps / 4.0, TerminalCheck::Flat { tol: 1e-9 }).with_samples(samples)
}

#[test]
fn tetrahedron_flattens_certified() {
    let shape = build_shape(&ShapeSpec::Tetrahedron).unwrap();
    let opts = FlattenOptions::default();
    let result = flatten_pipeline(&shape, &opts).unwrap();
    let profile = flatten_profile(opts.epsilon, 200);
    let (cert, _) = certify_motion(&result.trace, &profile).unwrap();
    assert!(cert.pass, "{:#?}", cert.checks);
    // All ten joints end in the target plane.
    let final_state = result.trace.final_state();
    assert_eq!(final_state.len(), 10);
    for p in &final_state.positions {
        assert!(result.target_plane.signed_distance(*p).abs() <= 1e-9);
    }
}

#[test]
fn cube_flattens_certified() {
    let shape = build_shape(&ShapeSpec::Cube).unwrap();
    let opts = FlattenOptions::default();
    let result = flatten_pipeline(&shape, &opts).unwrap();
    let profile = flatten_profile(opts.epsilon, 200);
    let (cert, _) = certify_motion(&result.trace, &profile).unwrap();
    assert!(cert.pass, "{:#?}", cert.checks);
}

#[test]
fn tetrahedron_to_line_certified() {
    let shape = build_shape(&ShapeSpec::Tetrahedron).unwrap();
    let opts = FlattenOptions { to_line: true, ..Default::default() };
    let result = flatten_pipeline(&shape, &opts).unwrap();
    let profile = CertifyProfile::new(opts.epsilon / 4.0, TerminalCheck::Collinear { tol: 1e-9 })
        .with_samples(200);
    let (cert, _) = certify_motion(&result.trace, &profile).unwrap();
    assert!(cert.pass, "{:#?}", cert.checks);
    // Spike count preserved: 6 spikes in, 6 out.
    assert_eq!(result.ball.spikes.len(), 6);
}

#[test]
fn interior_center_works() {
    let shape = build_shape(&ShapeSpec::Tetrahedron).unwrap();
    let opts = FlattenOptions { center: CenterSpec::Hull, ..Default::default() };
    let result = flatten_pipeline(&shape, &opts).unwrap();
    let profile = flatten_profile(opts.epsilon, 150);
    let (cert, _) = certify_motion(&result.trace, &profile).unwrap();
    assert!(cert.pass, "{:#?}", cert.checks);
}

#[test]
fn flatten_then_mirror_profile_fails_terminal() {
    // A flat final state is not the mirror image of the convex initial one.
    let shape = build_shape(&ShapeSpec::Tetrahedron).unwrap();
    let result = flatten_pipeline(&shape, &FlattenOptions::default()).unwrap();
    let plane = linkfold::Plane3::new(result.center, linkfold::Point3::new(0.0, 0.0, 1.0)).unwrap();
    let profile = CertifyProfile::new(0.0125, TerminalCheck::Mirror { plane, tol: 1e-6 })
        .with_samples(100);
    let (cert, _) = certify_motion(&result.trace, &profile).unwrap();
    assert!(!cert.check("mirror").unwrap().pass);
}
