# Corpus loading and the two text pre-processing transforms
