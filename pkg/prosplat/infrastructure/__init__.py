"""Infrastructure: file formats and artifact repositories."""
