"""Table extraction from health-bulletin PDFs."""
