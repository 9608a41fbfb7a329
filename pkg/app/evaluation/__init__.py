# Batch evaluation of system answers against gold answers
