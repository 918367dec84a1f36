//! Readout correction, tomography, fidelities and visibilities.

pub mod readout;
pub mod tomography;
pub mod visibility;

pub use readout::{apply_confusion, correct_readout, TwoQubitProbVector, VisibilityMatrix, MAX_CONDITION};
pub use tomography::{
    bell_fidelity, conventional_fidelity, pauli_pair, tomography_reconstruct, DensityMatrix4, Pauli,
    PauliExpectations, TomographyOptions, NEGATIVITY_FLAG,
};
pub use visibility::{
    dip_visibility, dip_visibility_for, fit_cosine, fringe_visibility, fwhm, CosineFit, PLATEAU_SIGMAS,
};
