"""Fine-interior toolkit application package."""
