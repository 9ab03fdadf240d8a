"""Linear stability of uniform equilibria: closed-form conditions, growth rates and maps."""
