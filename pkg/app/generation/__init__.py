# Candidate answer generation over retrieved contexts
