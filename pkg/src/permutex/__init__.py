"""Finite-model checks for the calculus of relations and Mal'tsev diagram lemmas."""
