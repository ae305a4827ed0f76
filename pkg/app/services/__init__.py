"""Domain services: metrics, generation, play-testing, design and evaluation."""
