#![allow(dead_code)]

use std::sync::OnceLock;

use cfsim_core::model::{build_rwa_hamiltonian, BasisIndex, CouplingForm, DeviceParams};
use cfsim_core::protocol::CfsimDevice;
use cfsim_core::spectrum::{diagonalize, DressedFrame};

pub fn paper() -> &'static CfsimDevice {
    static DEV: OnceLock<CfsimDevice> = OnceLock::new();
    DEV.get_or_init(|| CfsimDevice::new(DeviceParams::paper_device(), CouplingForm::Rwa).unwrap())
}

pub fn frame_of(d: &DeviceParams) -> DressedFrame {
    diagonalize(&build_rwa_hamiltonian(d).unwrap(), d).unwrap()
}

pub fn label(s: &str) -> BasisIndex {
    s.parse().unwrap()
}

/// Small device used where the full 100-level model is too slow.
pub fn small_device() -> DeviceParams {
    let mut d = DeviceParams::paper_device();
    d.dim_1 = 3;
    d.dim_2 = 3;
    d.dim_c = 2;
    d
}
