0.3
