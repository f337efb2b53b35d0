"""Model, objectives, training and test-time adaptation."""
