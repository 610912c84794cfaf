"""Physics modules: field geometry, Hamiltonians, propagation, sequences, readout and analyses."""
