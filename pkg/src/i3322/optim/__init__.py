"""In-repo numerical solvers."""
