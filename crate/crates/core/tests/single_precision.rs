use std::sync::Arc;

use superl_core::diagnostics::local_mass;
use superl_core::exact::liouville_bubble;
use superl_core::fields::{residuals, CouplingField};
use superl_core::grid::{make_grid, Domain, Point};
use superl_core::{Grid32, Grid64};

#[test]
fn f32_pipeline_tracks_f64() {
    let g32: Arc<Grid32> = Arc::new(make_grid(Domain::disk(Point::origin(), 1.0f32), 1.0 / 64.0).unwrap());
    let g64: Arc<Grid64> = Arc::new(make_grid(Domain::disk(Point::origin(), 1.0f64), 1.0 / 64.0).unwrap());
    let (u32_, p32) = liouville_bubble(2.0f32, Point::origin(), g32).unwrap();
    let (u64_, p64) = liouville_bubble(2.0f64, Point::origin(), g64).unwrap();
    let m32 = local_mass(&u32_, &p32, Point::origin(), 1.0).unwrap();
    let m64 = local_mass(&u64_, &p64, Point::origin(), 1.0).unwrap();
    assert!((m32 as f64 - m64).abs() < 1e-4 * m64);
    let r32 = residuals(&u32_, &p32, &CouplingField::constant(0.0)).unwrap().sup_u().unwrap();
    let r64 = residuals(&u64_, &p64, &CouplingField::constant(0.0)).unwrap().sup_u().unwrap();
    // single-precision cancellation in the Laplacian costs roughly eps/h²
    assert!((r32 as f64 - r64).abs() < 0.05, "{r32} {r64}");
}
