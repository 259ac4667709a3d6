//! Operator algebras: fermionic polynomials with symbolic lattice-spacing
//! powers, and qubit operators as sums of Pauli strings.

pub mod fermion;
pub mod pauli;
pub mod spin;

pub use fermion::{Factor, FermionOperator, FermionTerm, Mode};
pub use pauli::{Pauli, PauliString, StringAction};
pub use spin::{
    sigma_minus, sigma_plus, SparseMatrix, SpinOperator, DENSE_QUBIT_CAP, REGISTER_QUBIT_CAP,
};
