"""Species classifiers trained on pond water parameters."""
