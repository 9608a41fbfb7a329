# Answer-quality measures and the statistics used to compare systems
