# eudkit core: CoNLL-U model, enhanced graphs and the pipeline stages
