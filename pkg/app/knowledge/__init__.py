# Vector store: embeddings, exact cosine index, retrieval of answer contexts
