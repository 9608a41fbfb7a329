# TransE link prediction over the knowledge graph, plus triplet-pattern queries
