// Shared zoo fixtures for the integration tests.
#![allow(dead_code)]

use torusmix_core::flow::{FlowSpec, VectorField};
use torusmix_core::maps::{MapDescriptor, Stage};

pub fn zoo_maps() -> Vec<(&'static str, MapDescriptor<f64>)> {
    let single = |s| MapDescriptor::single(s).unwrap();
    vec![
        ("identity", MapDescriptor::identity()),
        ("hshear-1", single(Stage::HorizontalLinearShear { n: 1 })),
        ("vshear-10", single(Stage::VerticalLinearShear { n: 10 })),
        ("cat", single(Stage::IntegerLinear { matrix: [[2, 1], [1, 1]] })),
        ("flip", single(Stage::IntegerLinear { matrix: [[0, 1], [1, 0]] })),
        ("hsine", single(Stage::HorizontalSineShear { a: 0.25, k: 1 })),
        ("vsine", single(Stage::VerticalSineShear { a: 0.3, k: 2 })),
        (
            "composite",
            MapDescriptor::new(vec![
                Stage::HorizontalSineShear { a: 0.2, k: 1 },
                Stage::VerticalSineShear { a: 0.15, k: 3 },
                Stage::IntegerLinear { matrix: [[1, 1], [0, 1]] },
                Stage::VerticalLinearShear { n: -2 },
            ])
            .unwrap(),
        ),
    ]
}

pub fn zoo_flows() -> Vec<(&'static str, FlowSpec<f64>)> {
    let f = |field| FlowSpec::new(field, 200).unwrap();
    vec![
        ("zero", f(VectorField::Zero)),
        ("constant", f(VectorField::Constant { u: 0.3, v: -0.2 })),
        ("shear-x", f(VectorField::SteadySineShearX { u: 1.0, k: 1 })),
        ("shear-y", f(VectorField::SteadySineShearY { v: 0.5, k: 2 })),
        ("alternating-0.2", f(VectorField::AlternatingSineShear { u: 0.2, k: 1, period: 0.25 })),
        ("alternating-0.4", f(VectorField::AlternatingSineShear { u: 0.4, k: 1, period: 0.25 })),
        ("alternating-4", f(VectorField::AlternatingSineShear { u: 4.0, k: 1, period: 0.25 })),
    ]
}
