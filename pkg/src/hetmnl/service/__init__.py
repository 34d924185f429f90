"""FastAPI service wrapping the core estimation package."""
