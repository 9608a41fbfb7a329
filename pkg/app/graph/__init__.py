# Disease knowledge graph: construction, synonym linking, subgraph extraction
